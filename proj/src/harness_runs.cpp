#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvp/errors.hpp"
#include "mvp/harness.hpp"

namespace mvp::harness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBumpIntegral = 32.0 * kPi / 105.0;

bool near_singular_band(double t, const MagneticConfig& mag) {
  if (!mag.magnetized() || t <= 0.0) return false;
  const double period = *mag.gyro_period();
  const double k = std::round(t / period);
  return k >= 1.0 && std::abs(t - k * period) < 1e-3 * *mag.t_omega();
}

double gaussian3(double r2, double var) { return std::exp(-0.5 * r2 / var) / std::pow(2.0 * kPi * var, 1.5); }

double bump(double r2) { return r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0; }

}  // namespace

// ------------------------------------------------------------ field estimates

EstimateReport verify_field_estimates(const MomentSeries& series, double k, const MagneticConfig& mag) {
  EstimateReport rep;
  rep.name = "fields.estimates_k" + exponent_label(k);
  rep.threshold = 1.0;
  rep.notes.emplace_back("measure", "max ||E||_2 / sqrt(2 energy(0)); non-finite norms or fits give inf");
  if (series.empty()) throw std::invalid_argument("verify_field_estimates: empty series");
  const double e0 = series.front().energy;
  const double p_fit = k + 3.0;
  double mu = 0.0, c_fit = 0.0;
  bool have_fit = false, finite = true;
  std::map<double, double> sup_norm;
  for (const auto& r : series) {
    auto mk = r.m_k.find(k);
    if (mk != r.m_k.end()) mu = std::max(mu, mk->second);
    const auto e2 = r.e_norms.find(2.0);
    if (e2 != r.e_norms.end()) {
      const double ratio = e0 > 0.0 ? e2->second / std::sqrt(2.0 * e0) : (e2->second == 0.0 ? 0.0 : kInf);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    if (near_singular_band(r.t, mag)) continue;
    for (const auto& [p, v] : r.e_norms) {
      if (p > 1.5 && p <= 3.75) {
        sup_norm[p] = std::max(sup_norm[p], v);
        if (!std::isfinite(v)) finite = false;
      }
    }
    auto ep = r.e_norms.find(p_fit);
    if (ep != r.e_norms.end() && mk != r.m_k.end()) {
      const double shape = std::pow(1.0 + mu, 1.0 / p_fit) * (1.0 + std::log1p(mu));
      c_fit = std::max(c_fit, ep->second / shape);
      have_fit = true;
    }
    ++rep.samples;
  }
  for (const auto& [p, v] : sup_norm) rep.fitted["sup_E_L" + exponent_label(p)] = v;
  if (have_fit) {
    rep.fitted["C"] = c_fit;
    if (!std::isfinite(c_fit)) finite = false;
  } else {
    rep.notes.emplace_back("fit", "series lacks ||E||_{k+3} or M_k; fit skipped");
  }
  if (!finite) rep.max_ratio = kInf;
  rep.finalize();
  return rep;
}

// ------------------------------------------------------------------ stability

EstimateReport verify_stability_envelope(const std::vector<std::pair<double, double>>& q, double ceiling, double cap) {
  EstimateReport rep;
  rep.name = "stability.log_lipschitz";
  rep.threshold = 1.0;
  rep.notes.emplace_back("measure", "max(Q(T) / ceiling, C / cap)");
  if (q.empty()) throw std::invalid_argument("verify_stability_envelope: empty series");
  rep.samples = q.size();
  if (std::all_of(q.begin(), q.end(), [](const auto& s) { return s.second == 0.0; })) {
    rep.notes.emplace_back("trivial", "Q identically zero; no fit");
    rep.fitted["C"] = 0.0;
    rep.finalize();
    return rep;
  }
  auto first = std::find_if(q.begin(), q.end(), [](const auto& s) { return s.second > 0.0; });
  const double t0 = first->first;
  const double base = 1.0 + std::log(1.0 / first->second);
  double c = 0.0;
  for (auto it = first + 1; it != q.end(); ++it) {
    const double level = 1.0 + std::log(1.0 / it->second);
    if (!(level > 0.0)) {
      c = kInf;
      break;
    }
    const double dt = it->first - t0;
    if (dt > 0.0) c = std::max(c, -std::log(level / base) / dt);
  }
  rep.fitted["C"] = c;
  rep.fitted["Q0"] = first->second;
  rep.fitted["Q_final"] = q.back().second;
  rep.max_ratio = std::max(q.back().second / ceiling, c / cap);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------- decay

double DecayProfile::operator()(double r) const { return c * std::pow(1.0 + r, -alpha); }

DecayProfile decay_profile_for(const DistributionSpec& spec) {
  spec.validate();
  DecayProfile h;
  if (spec.family == "maxwellian") {
    // max over r of e^{-r^2/2T} (1 + r)^4 sits at r (1 + r) = 4 T
    const double temp = spec.temperature;
    const double r = 0.5 * (-1.0 + std::sqrt(1.0 + 16.0 * temp));
    const double rho_max = spec.mass / std::pow(2.0 * kPi * spec.sigma_x * spec.sigma_x, 1.5);
    h.c = rho_max * std::pow(2.0 * kPi * temp, -1.5) * std::exp(-0.5 * r * r / temp) * std::pow(1.0 + r, 4.0);
    return h;
  }
  if (spec.family == "two-stream") throw std::invalid_argument("decay profile needs a radial velocity profile");
  // compact bump: f_in <= A (1 - r^2/b^2)_+^2
  const double a = spec.bump_radius_x, b = spec.bump_radius_v;
  const double amp = spec.mass / (kBumpIntegral * a * a * a * kBumpIntegral * b * b * b);
  auto neg = [&](double r) { return -amp * bump(r * r / (b * b)) * std::pow(1.0 + r, 4.0); };
  const auto best = boost::math::tools::brent_find_minima(neg, 0.0, b, 52);
  h.c = -best.second * (1.0 + 1e-12);
  return h;
}

DecayChecker::DecayChecker(DecayProfile h) : h_(h) {}

void DecayChecker::observe(double t, const ParticleEnsemble& ens, const VectorField& e) {
  if (tags_.empty()) {
    if (ens.tags.size() != ens.size() || ens.size() == 0) throw std::invalid_argument("decay check needs f_in tags");
    tags_ = ens.tags;
  }
  times_.push_back(t);
  std::vector<double> s(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) s[i] = norm(ens.velocities[i]);
  speeds_.push_back(std::move(s));
  a_t_ = std::max(a_t_, lp_norm(e, kInf));
}

EstimateReport DecayChecker::report() const {
  EstimateReport rep;
  rep.name = "decay.envelope";
  rep.threshold = 0.0;
  rep.notes.emplace_back("measure", "particles x times with tag > h(max(0, |v| - A_T t))");
  double worst = 0.0;
  for (std::size_t n = 0; n < times_.size(); ++n) {
    for (std::size_t i = 0; i < tags_.size(); ++i) {
      const double env = h_(std::max(0.0, speeds_[n][i] - a_t_ * times_[n]));
      if (tags_[i] > env * (1.0 + 1e-12)) rep.max_ratio += 1.0;
      worst = std::max(worst, tags_[i] / env);
      ++rep.samples;
    }
  }
  rep.fitted["A_T"] = a_t_;
  rep.fitted["c"] = h_.c;
  rep.fitted["max_tag_over_envelope"] = worst;
  rep.finalize();
  return rep;
}

// ------------------------------------------------------------ bounded density

double envelope_g(const DistributionSpec& spec, const MagneticConfig& mag, double field_bound, double t,
                  const Vec3& x, const Vec3& v) {
  spec.validate();
  if (spec.family == "two-stream") throw std::invalid_argument("bounded-density envelope needs an analytic family");
  const double w = mag.omega(), speed = norm(v);
  const double grow = (field_bound + w * speed) * std::exp(w * t);
  const double rx = grow * t * t, rv = grow * t;
  const double dz = std::max(0.0, norm(x + t * v - spec.center) - rx);
  const double dv = std::max(0.0, speed - rv);
  if (spec.family == "compact-bump") {
    const double a = spec.bump_radius_x, b = spec.bump_radius_v;
    const double amp = spec.mass / (kBumpIntegral * a * a * a * kBumpIntegral * b * b * b);
    return amp * bump(dz * dz / (a * a)) * bump(dv * dv / (b * b));
  }
  return spec.mass * gaussian3(dz * dz, spec.sigma_x * spec.sigma_x) * gaussian3(dv * dv, spec.temperature);
}

double envelope_integral(const DistributionSpec& spec, const MagneticConfig& mag, double field_bound, double t,
                         const Vec3& x) {
  const double w = mag.omega();
  const double kappa = w * t * std::exp(w * t);
  if (kappa >= 1.0) {
    // as |v| -> infinity both radii outgrow the shifts, so g tends to its
    // value with the position distance |x - c| - R t^2 e^{wt} and zero
    // velocity distance
    const double dz = std::max(0.0, norm(x - spec.center) - field_bound * t * t * std::exp(w * t));
    const Vec3 far = spec.center + dz * Vec3{{1.0, 0.0, 0.0}};
    if (envelope_g(spec, MagneticConfig(0.0), 0.0, 0.0, far, Vec3{}) > 0.0) return kInf;
  }
  const double tail = spec.family == "compact-bump" ? spec.bump_radius_v : 12.0 * std::sqrt(spec.temperature);
  const double r_max = (tail + field_bound * t * std::exp(w * t)) / std::max(1.0 - kappa, 1e-3);

  // spherical product rule: Gauss-Legendre panels in |v|, Fibonacci directions
  static const double gl_x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double gl_w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const int panels = 96, dirs = 1024;
  std::vector<Vec3> n(dirs);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < dirs; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / dirs;
    const double rho = std::sqrt(1.0 - z * z);
    n[i] = {rho * std::cos(golden * i), rho * std::sin(golden * i), z};
  }
  double total = 0.0;
  const double hp = r_max / panels;
  for (int p = 0; p < panels; ++p) {
    for (int g = 0; g < 4; ++g) {
      const double r = hp * (p + 0.5 * (1.0 + gl_x[g]));
      double ang = 0.0;
      for (const Vec3& d : n) ang += envelope_g(spec, mag, field_bound, t, x, r * d);
      total += 0.5 * hp * gl_w[g] * r * r * ang * (4.0 * kPi / dirs);
    }
  }
  return total;
}

EstimateReport verify_bounded_density_condition(const DistributionSpec& spec, const MagneticConfig& mag,
                                                double field_bound, const std::vector<double>& t_grid,
                                                const std::vector<Vec3>& x_grid,
                                                const std::vector<std::pair<double, double>>& rho_max,
                                                double factor) {
  EstimateReport rep;
  rep.name = "density.bounded_envelope";
  rep.threshold = factor;
  rep.notes.emplace_back("measure", "max_t ||rho(t)||_inf / sup_{t,x} int g dv; inf when the envelope diverges");
  double sup = 0.0;
  double first_divergent = kInf;
  for (double t : t_grid) {
    for (const Vec3& x : x_grid) {
      const double v = envelope_integral(spec, mag, field_bound, t, x);
      if (std::isinf(v)) first_divergent = std::min(first_divergent, t);
      sup = std::max(sup, v);
      ++rep.samples;
    }
  }
  double rho = 0.0;
  for (const auto& [t, r] : rho_max) rho = std::max(rho, r);
  rep.fitted["sup_envelope_integral"] = sup;
  rep.fitted["max_rho"] = rho;
  rep.fitted["field_bound"] = field_bound;
  if (std::isfinite(first_divergent)) {
    rep.fitted["first_divergent_t"] = first_divergent;
    rep.notes.emplace_back("divergence", "omega t e^{omega t} >= 1 makes g positive for all large |v|");
    rep.max_ratio = kInf;
  } else {
    rep.max_ratio = sup > 0.0 ? rho / sup : (rho == 0.0 ? 0.0 : kInf);
  }
  rep.finalize();
  return rep;
}

// ------------------------------------------------------------- representation

namespace {

// Quadratic spline S1(z) = 1/2 - z^2/4 (|z| <= 1), (2 - |z|)^2 / 4 (1 <= |z| <= 2).
double spline(double z) {
  const double a = std::abs(z);
  if (a <= 1.0) return 0.5 - 0.25 * a * a;
  if (a <= 2.0) return 0.25 * (2.0 - a) * (2.0 - a);
  return 0.0;
}

double hat(double z) { return std::max(0.0, 1.0 - std::abs(z)); }

struct SplineStencil {
  std::array<std::size_t, 3> base;  // first of four nodes per axis
  std::array<double, 3> u;          // position in cell-centre index units
};

bool spline_stencil(const GridSpec& g, const Vec3& x, SplineStencil& st) {
  for (int a = 0; a < 3; ++a) {
    const double u = (x[a] - g.origin[a]) / g.spacing(a) - 0.5;
    if (!(u >= 1.0 && u < static_cast<double>(g.cells[a]) - 2.0)) return false;
    st.base[a] = static_cast<std::size_t>(std::floor(u)) - 1;
    st.u[a] = u;
  }
  return true;
}

// deposits q * prod_a K_a(n_a - u_a) / h^3 with K_a = hat for a == hat_axis
void deposit_one(const GridSpec& g, const SplineStencil& st, double q, int hat_axis, std::vector<double>& out) {
  double wx[3][4];
  for (int a = 0; a < 3; ++a) {
    for (int m = 0; m < 4; ++m) {
      const double z = static_cast<double>(st.base[a] + m) - st.u[a];
      wx[a][m] = a == hat_axis ? hat(z) : spline(z);
    }
  }
  const double s = q / g.cell_volume();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        out[g.index(st.base[0] + i, st.base[1] + j, st.base[2] + k)] += s * wx[0][i] * wx[1][j] * wx[2][k];
      }
}

double l1(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += std::abs(v);
  return s;
}

}  // namespace

ScalarField deposit_spline(const GridSpec& grid, const std::vector<Vec3>& pos, const std::vector<double>& w) {
  ScalarField rho(grid);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    SplineStencil st;
    if (!spline_stencil(grid, pos[i], st)) throw DomainError(i, pos[i][0], pos[i][1], pos[i][2]);
    deposit_one(grid, st, w[i], -1, rho.values);
  }
  return rho;
}

RepresentationResult representation_mismatch(const std::vector<RepresentationFrame>& history,
                                             const std::vector<double>& weights, const GridSpec& eval_grid,
                                             const MagneticConfig& mag) {
  if (history.empty()) throw std::invalid_argument("representation check needs a run history");
  const RepresentationFrame& last = history.back();
  const double t = last.t;
  if (near_singular_time(t, mag)) throw SingularTimeError("representation check at a singular time");
  const std::size_t nq = history.size() - 1;
  const double ds = nq > 0 ? t / static_cast<double>(nq) : 0.0;
  for (std::size_t j = 0; j <= nq; ++j) {
    if (std::abs(history[j].t - ds * j) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("representation history must be uniformly spaced from 0");
    }
  }

  const ScalarField rho = deposit_spline(eval_grid, last.positions, weights);
  std::vector<Vec3> transported(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    transported[i] = flow(0.0, t, PhasePoint{history[0].positions[i], history[0].velocities[i]}, mag).X;
  }
  const ScalarField rho0 = deposit_spline(eval_grid, transported, weights);

  std::array<std::vector<double>, 3> f;
  for (auto& c : f) c.assign(eval_grid.size(), 0.0);
  for (std::size_t j = 0; j <= nq && nq > 0; ++j) {
    const RepresentationFrame& fr = history[j];
    const double tw = (j == 0 || j == nq ? 0.5 : 1.0) * ds;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const Vec3 x = flow(fr.t, t, PhasePoint{fr.positions[i], fr.velocities[i]}, mag).X;
      const Vec3 hv = kernel_h(t, fr.t, fr.fields[i], mag);
      SplineStencil st;
      if (!spline_stencil(eval_grid, x, st)) throw DomainError(i, x[0], x[1], x[2]);
      for (int a = 0; a < 3; ++a) deposit_one(eval_grid, st, tw * weights[i] * hv[a], a, f[a]);
    }
  }

  const auto& n = eval_grid.cells;
  std::vector<double> div(eval_grid.size(), 0.0), resid(eval_grid.size()), transport(eval_grid.size());
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        const std::array<std::size_t, 3> c{i, j, k};
        double d = 0.0;
        for (int a = 0; a < 3; ++a) {
          auto up = c, dn = c;
          const double fu = c[a] + 1 < n[a] ? (++up[a], f[a][eval_grid.index(up[0], up[1], up[2])]) : 0.0;
          const double fd = c[a] > 0 ? (--dn[a], f[a][eval_grid.index(dn[0], dn[1], dn[2])]) : 0.0;
          d += (fu - fd) / (2.0 * eval_grid.spacing(a));
        }
        div[eval_grid.index(i, j, k)] = d;
      }
  for (std::size_t m = 0; m < eval_grid.size(); ++m) {
    resid[m] = rho0[m] + div[m] - rho[m];
    transport[m] = rho0[m] - rho[m];
  }
  const double norm_rho = l1(rho.values);
  return {l1(resid) / norm_rho, l1(transport) / norm_rho, l1(div) / norm_rho};
}

Vec3 gaussian_coulomb_field(const Vec3& x, double sigma, double charge) {
  const double r = norm(x);
  const double rho0 = charge / std::pow(2.0 * kPi * sigma * sigma, 1.5);
  if (r < 1e-3 * sigma) return (rho0 / 3.0) * x;
  const double z = r / sigma;
  const double enclosed = charge * (std::erf(z / std::numbers::sqrt2) - std::sqrt(2.0 / kPi) * z * std::exp(-0.5 * z * z));
  return (enclosed / (4.0 * kPi * r * r * r)) * x;
}

std::vector<RepresentationFrame> frozen_field_history(const FrozenFieldProblem& prob, std::size_t nq,
                                                      std::vector<double>* weights) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 6>;
  if (nq == 0) throw std::invalid_argument("frozen_field_history needs nq >= 1");
  ParticleEnsemble ens = sample_initial(prob.initial, prob.particles, prob.seed);
  if (weights) *weights = ens.weights;
  const double w = prob.omega;
  auto field = [&](const Vec3& x) { return gaussian_coulomb_field(x, prob.field_sigma, prob.field_charge); };
  auto rhs = [&](const State& y, State& dy, double) {
    const Vec3 e = field(Vec3{{y[0], y[1], y[2]}});
    dy[0] = y[3];
    dy[1] = y[4];
    dy[2] = y[5];
    dy[3] = w * y[4] + e[0];
    dy[4] = -w * y[3] + e[1];
    dy[5] = e[2];
  };

  std::vector<RepresentationFrame> frames(nq + 1);
  const double ds = prob.t / static_cast<double>(nq);
  for (std::size_t j = 0; j <= nq; ++j) {
    frames[j].t = ds * static_cast<double>(j);
    frames[j].positions.resize(ens.size());
    frames[j].velocities.resize(ens.size());
    frames[j].fields.resize(ens.size());
  }
  odeint::runge_kutta4<State> stepper;
  const double h = ds / static_cast<double>(prob.substeps);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    State y{ens.positions[i][0],  ens.positions[i][1],  ens.positions[i][2],
            ens.velocities[i][0], ens.velocities[i][1], ens.velocities[i][2]};
    for (std::size_t j = 0; j <= nq; ++j) {
      if (j > 0) {
        for (std::size_t k = 0; k < prob.substeps; ++k) stepper.do_step(rhs, y, frames[j - 1].t + h * k, h);
      }
      const Vec3 x{{y[0], y[1], y[2]}};
      frames[j].positions[i] = x;
      frames[j].velocities[i] = {y[3], y[4], y[5]};
      frames[j].fields[i] = field(x);
    }
  }
  return frames;
}

std::vector<RepresentationFrame> subsample(const std::vector<RepresentationFrame>& history, std::size_t stride) {
  if (stride == 0 || history.empty() || (history.size() - 1) % stride != 0) {
    throw std::invalid_argument("subsample stride must divide the number of intervals");
  }
  std::vector<RepresentationFrame> out;
  for (std::size_t j = 0; j < history.size(); j += stride) out.push_back(history[j]);
  return out;
}

RepresentationFrame capture_frame(const Simulation& sim) {
  RepresentationFrame fr;
  fr.t = sim.time();
  fr.positions = sim.ensemble().positions;
  fr.velocities = sim.ensemble().velocities;
  fr.fields.resize(fr.positions.size());
  kernels::gather_cic(sim.config().exec(), sim.field(), fr.positions, fr.fields);
  return fr;
}

EstimateReport verify_representation(const std::vector<std::size_t>& nq_levels,
                                     const std::vector<RepresentationResult>& results, double tol,
                                     double min_decrease) {
  if (nq_levels.size() != results.size() || results.empty()) {
    throw std::invalid_argument("verify_representation: levels and results differ");
  }
  EstimateReport rep;
  rep.name = "representation.mismatch";
  rep.threshold = 1.0;
  rep.notes.emplace_back("measure", "max(finest mismatch / tol, min_decrease / smallest decrease factor)");
  double worst_decrease = kInf;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string tag = "nq" + std::to_string(nq_levels[i]);
    rep.fitted["mismatch_" + tag] = results[i].mismatch;
    rep.fitted["transport_only_" + tag] = results[i].transport_only;
    rep.fitted["integral_term_" + tag] = results[i].integral_term;
    if (i > 0) worst_decrease = std::min(worst_decrease, results[i - 1].mismatch / results[i].mismatch);
  }
  rep.samples = results.size();
  rep.fitted["min_decrease"] = worst_decrease;
  rep.max_ratio = results.back().mismatch / tol;
  if (results.size() > 1) rep.max_ratio = std::max(rep.max_ratio, min_decrease / worst_decrease);
  rep.finalize();
  return rep;
}

}  // namespace mvp::harness
