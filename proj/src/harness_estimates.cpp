#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mvp/harness.hpp"

namespace mvp::harness {

// ------------------------------------------------------------ interpolation

double PhaseGrid::speed(std::size_t b) const {
  const double mid = 0.5 * static_cast<double>(nv - 1);
  const std::size_t i = b / (nv * nv), j = (b / nv) % nv, k = b % nv;
  const double a = (static_cast<double>(i) - mid) * hv, c = (static_cast<double>(j) - mid) * hv,
               e = (static_cast<double>(k) - mid) * hv;
  return std::sqrt(a * a + c * c + e * e);
}

PhaseGrid PhaseGrid::dilate_velocity(double lambda) const {
  PhaseGrid g = *this;
  g.hv *= lambda;
  return g;
}

PhaseGrid PhaseGrid::scale_mass(double c) const {
  PhaseGrid g = *this;
  for (double& v : g.f) v *= c;
  return g;
}

PhaseGrid random_phase_grid(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PhaseGrid g;
  g.hx = 0.2 + 0.8 * u(rng);
  g.hv = 0.2 + 0.8 * u(rng);
  const std::size_t nv3 = g.nv * g.nv * g.nv;
  g.f.resize(g.nx * g.nx * g.nx * nv3);
  const double sparsity = 0.9 * u(rng);
  for (double& v : g.f) v = u(rng) < sparsity ? 0.0 : std::exp(6.0 * (u(rng) - 0.5));
  if (std::all_of(g.f.begin(), g.f.end(), [](double v) { return v == 0.0; })) g.f[nv3 / 2 + 1] = 1.0;
  return g;
}

namespace {

double power(double s, double k) { return k == 0.0 ? 1.0 : std::pow(s, k); }

// |v_b|^k for every velocity cell b
std::vector<double> speed_powers(const PhaseGrid& g, double k) {
  std::vector<double> w(g.nv * g.nv * g.nv);
  for (std::size_t b = 0; b < w.size(); ++b) w[b] = power(g.speed(b), k);
  return w;
}

double moment_total(const PhaseGrid& g, double k) {
  const std::vector<double> w = speed_powers(g, k);
  double m = 0.0;
  for (std::size_t n = 0; n < g.f.size(); ++n) m += g.f[n] * w[n % w.size()];
  return m * std::pow(g.hx * g.hv, 3);
}

double f_norm(const PhaseGrid& g, double p) {
  if (std::isinf(p)) return *std::max_element(g.f.begin(), g.f.end());
  double s = 0.0;
  for (double v : g.f) s += std::pow(v, p);
  return std::pow(s * std::pow(g.hx * g.hv, 3), 1.0 / p);
}

}  // namespace

InterpolationSample interpolation_sample(const PhaseGrid& g, double k, double kp, double p) {
  if (!(kp >= 0.0) || kp > k || !(p >= 1.0)) throw std::invalid_argument("invalid exponents: need 0 <= k' <= k, p >= 1");
  const double inv_q = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
  const double a = k + 3.0 * inv_q, b = kp + 3.0 * inv_q;
  if (!(b > 0.0)) throw std::invalid_argument("r undefined for k' = 0, p = 1");
  InterpolationSample s{k, kp, p, a / b};
  const std::size_t nv3 = g.nv * g.nv * g.nv, nx3 = g.nx * g.nx * g.nx;
  const double hv3 = std::pow(g.hv, 3), hx3 = std::pow(g.hx, 3);
  const std::vector<double> w = speed_powers(g, kp);
  double sum = 0.0;
  for (std::size_t c = 0; c < nx3; ++c) {
    double m = 0.0;
    for (std::size_t v = 0; v < nv3; ++v) m += g.f[c * nv3 + v] * w[v];
    sum += std::pow(m * hv3, s.r);
  }
  s.lhs = std::pow(sum * hx3, 1.0 / s.r);
  s.rhs = std::pow(f_norm(g, p), (k - kp) / a) * std::pow(moment_total(g, k), b / a);
  return s;
}

double est_ml_ratio(const PhaseGrid& g, double k, double l) {
  if (!(l >= 0.0) || !(l <= k) || !(k > 0.0)) throw std::invalid_argument("est_ml needs 0 <= l <= k, k > 0");
  return moment_total(g, l) / (std::pow(f_norm(g, 1.0), (k - l) / k) * std::pow(moment_total(g, k), l / k));
}

InterpolationStudy run_interpolation_trials(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  InterpolationStudy st;
  for (std::size_t t = 0; t < trials; ++t) {
    const PhaseGrid g = random_phase_grid(rng());
    const double k = 3.0 + 3.0 * u(rng);
    const double p = u(rng) < 0.5 ? kInf : 1.0 + 7.0 * u(rng);
    const double kp = (0.02 + 0.98 * u(rng)) * k;
    const InterpolationSample s = interpolation_sample(g, k, kp, p);
    const double ratio = s.ratio();
    st.max_ratio = std::max(st.max_ratio, ratio);
    for (double lambda : {0.25, 4.0}) {
      const double r2 = interpolation_sample(g.dilate_velocity(lambda), k, kp, p).ratio();
      st.max_scaling_defect = std::max(st.max_scaling_defect, std::abs(r2 - ratio) / ratio);
    }
    for (double c : {1e-3, 1e3}) {
      const double r2 = interpolation_sample(g.scale_mass(c), k, kp, p).ratio();
      st.max_scaling_defect = std::max(st.max_scaling_defect, std::abs(r2 - ratio) / ratio);
    }
    st.max_est_ml_ratio = std::max(st.max_est_ml_ratio, est_ml_ratio(g, k, k * u(rng)));
    ++st.trials;
  }
  return st;
}

std::vector<EstimateReport> verify_moment_interpolation(std::size_t trials, std::uint64_t seed) {
  const InterpolationStudy a = run_interpolation_trials(trials, seed);
  const InterpolationStudy b = run_interpolation_trials(10 * trials, seed + 1000);

  EstimateReport mk;
  mk.name = "inequalities.ineq_mk";
  mk.samples = a.trials;
  mk.max_ratio = a.max_ratio;
  mk.threshold = 1.1 * b.max_ratio;
  mk.fitted["C"] = a.max_ratio;
  mk.fitted["C_10x"] = b.max_ratio;
  mk.notes.emplace_back("measure", "max ||m_k'||_r / (||f||_p^a M_k^b), threshold 1.1 x the 10x-set constant");
  mk.finalize();

  EstimateReport sc;
  sc.name = "inequalities.scaling";
  sc.samples = a.trials + b.trials;
  sc.max_ratio = std::max(a.max_scaling_defect, b.max_scaling_defect);
  sc.threshold = 1e-10;
  sc.notes.emplace_back("measure", "relative ratio change for lambda in {1/4, 4} and mass factors {1e-3, 1e3}");
  sc.finalize();

  EstimateReport ml;
  ml.name = "inequalities.est_ml";
  ml.samples = a.trials + b.trials;
  ml.max_ratio = std::max(a.max_est_ml_ratio, b.max_est_ml_ratio);
  ml.threshold = 1.0 + 1e-12;
  ml.fitted["C"] = ml.max_ratio;
  ml.notes.emplace_back("measure", "max M_l / (||f||_1^{(k-l)/k} M_k^{l/k}); Hoelder gives 1");
  ml.finalize();
  return {mk, sc, ml};
}

// ------------------------------------------------------------ t0 selection

namespace {

void require_d(double d) {
  if (!(d > 1.5)) throw std::invalid_argument("d must exceed 3/2 so that 2 - 3/d > 0");
}

double t0_exponent(double k, double d) {
  const double l = derived_l(k, d);
  return -3.0 * (l + 3.0) / ((k + 3.0) * (k + 3.0) * (2.0 - 3.0 / d));
}

}  // namespace

double derived_l(double k, double d) {
  require_d(d);
  const double dp = d / (d - 1.0);
  return 3.0 * (k + 3.0) / dp - 3.0;
}

double select_t0(double t, double mu_k, double k, double d) {
  require_d(d);
  if (!(t > 0.0)) throw std::invalid_argument("select_t0 needs t > 0");
  if (!(mu_k >= 0.0)) throw std::invalid_argument("select_t0 needs mu_k >= 0");
  return t * std::pow(1.0 + mu_k, t0_exponent(k, d));
}

double select_t0_residual(double t, double mu_k, double k, double d) {
  const double t0 = select_t0(t, mu_k, k, d);
  const double l = derived_l(k, d);
  return std::abs(std::pow(t0 / t, 2.0 - 3.0 / d) * std::pow(1.0 + mu_k, 3.0 * (l + 3.0) / ((k + 3.0) * (k + 3.0))) -
                  1.0);
}

// ------------------------------------------------------- small / large time

double small_time_integral(const MagneticConfig& mag, double d, double t0) {
  if (!(t0 > 0.0)) throw std::invalid_argument("small_time_integral needs t0 > 0");
  if (mag.magnetized() && mag.omega() * t0 > std::numbers::pi * (1.0 + 1e-12)) {
    throw std::invalid_argument("omega t0 beyond pi lies outside the window");
  }
  if (!mag.magnetized()) return std::pow(t0, 2.0 - 3.0 / d) / (2.0 - 3.0 / d);
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([&](double s) { return zeta_rescaled(s, mag, d); }, 0.0, t0);
}

EstimateReport verify_small_time_bound(const MagneticConfig& mag, double d, const std::vector<double>& t0_grid,
                                       double factor) {
  EstimateReport rep;
  rep.name = "estimates.small_time_d" + exponent_label(d);
  rep.threshold = factor;
  rep.notes.emplace_back("measure", "max / min over the grid of int_0^t0 zeta / t0^{2-3/d}");
  double lo = kInf, hi = 0.0;
  for (double t0 : t0_grid) {
    const double ratio = small_time_integral(mag, d, t0) / std::pow(t0, 2.0 - 3.0 / d);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    ++rep.samples;
  }
  rep.fitted["C"] = hi;
  rep.fitted["min_ratio"] = lo;
  rep.max_ratio = hi / lo;
  rep.finalize();
  return rep;
}

double large_time_integral(const MagneticConfig& mag, double t0, double t) {
  if (!(t0 > 0.0) || t0 > t) throw std::invalid_argument("large_time_integral needs 0 < t0 <= t");
  if (!mag.magnetized()) return std::pow(2.0, 2.0 / 3.0) * std::log(t / t0);
  const double u0 = mag.omega() * t0, u1 = mag.omega() * t;
  if (u1 > std::numbers::pi * (1.0 + 1e-12)) throw std::invalid_argument("omega t beyond pi lies outside the window");
  auto f = [](double u) {
    const double hc = half_chord(1.0, u);
    return std::pow(2.0 * u * u / (hc * hc), 2.0 / 3.0) / u;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, u0, u1, 15, 1e-14);
}

EstimateReport verify_large_time_log(const MagneticConfig& mag, const std::vector<double>& t0_grid, double t,
                                     double bound) {
  EstimateReport rep;
  rep.name = "estimates.large_time_log";
  rep.threshold = bound;
  rep.notes.emplace_back("measure", "max int_t0^t (1/s)(s^2/(1-cos s))^{2/3} ds / ln(t/t0), rescaled time");
  for (double t0 : t0_grid) {
    if (t0 > t) throw std::invalid_argument("verify_large_time_log: t0 exceeds t");
    if (t0 == t) {
      rep.notes.emplace_back("t0_equals_t", "0/0 counted as pass");
      continue;
    }
    rep.max_ratio = std::max(rep.max_ratio, large_time_integral(mag, t0, t) / std::log(t / t0));
    ++rep.samples;
  }
  rep.fitted["C"] = rep.max_ratio;
  rep.finalize();
  return rep;
}

// ----------------------------------------------------------------- Gronwall

std::vector<GronwallFit> fit_gronwall_envelope(const std::vector<std::pair<double, double>>& y, double window,
                                               double cap, double tol) {
  if (y.empty()) throw std::invalid_argument("fit_gronwall_envelope: empty series");
  if (!(window > 0.0)) throw std::invalid_argument("fit_gronwall_envelope: window must be positive");
  const double eps = 1e-9 * window;
  const double t_last = y.back().first;
  std::vector<GronwallFit> fits;
  for (std::size_t p = 0; static_cast<double>(p) * window < t_last - eps || p == 0; ++p) {
    const double a = static_cast<double>(p) * window, b = a + window;
    double log_start = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> in;  // (tau, ln y)
    for (const auto& [t, v] : y) {
      if (t <= a + eps) log_start = std::log(v);
      if (t >= a - eps && t <= b + eps) in.emplace_back(std::max(0.0, t - a), std::log(v));
    }
    if (in.empty() || std::isnan(log_start)) throw std::invalid_argument("fit_gronwall_envelope: empty window");

    auto bound = [&](double c, double tau) {
      const double g = std::exp(c * tau);
      if (std::isinf(g)) return kInf;
      return c * window * g + g * log_start;
    };
    auto holds = [&](double c) {
      for (const auto& [tau, ly] : in) {
        if (!(ly <= bound(c, tau))) return false;
      }
      return true;
    };

    GronwallFit fit;
    fit.window = p;
    fit.t_begin = a;
    fit.t_end = std::min(b, t_last);
    if (holds(0.0)) {
      fit.C = 0.0;
    } else if (!holds(cap)) {
      fit.C = kInf;
      fit.finite = false;
    } else {
      double lo = 0.0, hi = cap;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
      }
      fit.C = hi;
    }
    for (const auto& [tau, ly] : in) {
      fit.envelope.emplace_back(a + tau, fit.finite ? std::exp(bound(fit.C, tau)) : kInf);
    }
    fits.push_back(std::move(fit));
  }
  return fits;
}

std::vector<GronwallFit> fit_gronwall_envelope(const MomentSeries& series, double k, const MagneticConfig& mag,
                                               double cap) {
  std::vector<std::pair<double, double>> y;
  double mu = 0.0;
  for (const auto& r : series) {
    auto it = r.m_k.find(k);
    if (it == r.m_k.end()) throw std::invalid_argument("series lacks M_" + exponent_label(k));
    mu = std::max(mu, it->second);
    y.emplace_back(r.t, 1.0 + mu);
  }
  const double window = mag.magnetized() ? *mag.t_omega() : (series.empty() ? 1.0 : series.back().t);
  return fit_gronwall_envelope(y, window, cap);
}

EstimateReport gronwall_report(const std::vector<GronwallFit>& fits, double k, double cap) {
  EstimateReport rep;
  rep.name = "gronwall.k" + exponent_label(k);
  rep.threshold = cap;
  rep.notes.emplace_back("measure", "largest fitted C over the windows");
  for (const auto& f : fits) {
    rep.fitted["C_window" + std::to_string(f.window)] = f.C;
    rep.max_ratio = std::max(rep.max_ratio, f.C);
    rep.samples += f.envelope.size();
  }
  rep.fitted["C"] = rep.max_ratio;
  rep.finalize();
  return rep;
}

}  // namespace mvp::harness
