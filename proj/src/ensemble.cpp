#include "mvp/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mvp/errors.hpp"
#include "mvp/snapshot.hpp"

namespace mvp {

namespace {

constexpr double kPi = std::numbers::pi;

// Normalized (1 - r^2)_+^2 on the unit ball in 3D.
constexpr double kBumpIntegral = 32.0 * kPi / 105.0;

double gaussian3(double r2, double var) { return std::exp(-0.5 * r2 / var) / std::pow(2.0 * kPi * var, 1.5); }

double bump(double r2) { return r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0; }

Vec3 sample_bump_ball(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), acc(0.0, 1.0);
  for (;;) {
    const Vec3 y{{u(rng), u(rng), u(rng)}};
    const double r2 = norm2(y);
    if (r2 < 1.0 && acc(rng) < bump(r2)) return y;
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void DistributionSpec::validate() const {
  if (family != "maxwellian" && family != "two-stream" && family != "compact-bump") {
    throw ConfigError("unknown distribution family '" + family + "'");
  }
  if (!(mass > 0.0)) throw ConfigError("initial.mass must be positive");
  if (family == "compact-bump") {
    if (!(bump_radius_x > 0.0) || !(bump_radius_v > 0.0)) throw ConfigError("bump radii must be positive");
  } else {
    if (!(sigma_x > 0.0)) throw ConfigError("initial.sigma_x must be positive");
    if (!(temperature > 0.0)) throw ConfigError("initial.temperature must be positive");
  }
}

double DistributionSpec::density(const Vec3& x, const Vec3& v) const {
  const Vec3 y = x - center;
  if (family == "compact-bump") {
    const double a = bump_radius_x, b = bump_radius_v;
    const double amp = mass / (kBumpIntegral * a * a * a * kBumpIntegral * b * b * b);
    return amp * bump(norm2(y) / (a * a)) * bump(norm2(v) / (b * b));
  }
  const double gx = mass * gaussian3(norm2(y), sigma_x * sigma_x);
  if (family == "two-stream") {
    const Vec3 u{{0.0, 0.0, drift}};
    return gx * 0.5 * (gaussian3(norm2(v - u), temperature) + gaussian3(norm2(v + u), temperature));
  }
  return gx * gaussian3(norm2(v), temperature);
}

double DistributionSpec::sup() const {
  if (family == "compact-bump") return density(center, Vec3{});
  if (family == "two-stream") {
    // the maximum over v sits on the v_3 axis; scan it
    double best = 0.0;
    const double s = std::sqrt(temperature);
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
      const double v3 = (std::abs(drift) + 2.0 * s) * i / n;
      best = std::max(best, density(center, Vec3{{0.0, 0.0, v3}}));
    }
    return best;
  }
  return density(center, Vec3{});
}

double DistributionSpec::speed_scale() const {
  if (family == "compact-bump") return bump_radius_v;
  return 5.0 * std::sqrt(temperature) + std::abs(drift);
}

ParticleEnsemble sample_initial(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("sample_initial needs at least one particle");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  ParticleEnsemble ens;
  ens.positions.resize(n);
  ens.velocities.resize(n);
  ens.weights.assign(n, spec.mass / static_cast<double>(n));
  ens.tags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 x, v;
    if (spec.family == "compact-bump") {
      x = spec.center + spec.bump_radius_x * sample_bump_ball(rng);
      v = spec.bump_radius_v * sample_bump_ball(rng);
    } else {
      for (int a = 0; a < 3; ++a) x[a] = spec.center[a] + spec.sigma_x * normal(rng);
      const double s = std::sqrt(spec.temperature);
      for (int a = 0; a < 3; ++a) v[a] = s * normal(rng);
      if (spec.family == "two-stream") v[2] += coin(rng) ? spec.drift : -spec.drift;
    }
    ens.positions[i] = x;
    ens.velocities[i] = v;
    ens.tags[i] = spec.density(x, v);
  }
  return ens;
}

void step(ParticleEnsemble& ens, const VectorField& e, double dt, const MagneticConfig& mag, kernels::Exec exec) {
  std::vector<Vec3> accel(ens.size());
  kernels::gather_cic(exec, e, ens.positions, accel);
  kernels::kick(exec, ens.velocities, accel, 0.5 * dt);
  kernels::free_flow(exec, ens.positions, ens.velocities, dt, mag);
  kernels::gather_cic(exec, e, ens.positions, accel);
  kernels::kick(exec, ens.velocities, accel, 0.5 * dt);
}

std::map<double, double> moments(const ParticleEnsemble& ens, const std::vector<double>& ks, kernels::Exec exec) {
  std::map<double, double> out;
  for (double k : ks) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("moment exponents must be finite and >= 0");
    // |v|^0 = 1: M0 is the (compensated) total mass
    out[k] = k == 0.0 ? ens.total_mass() : kernels::power_sum(exec, ens.velocities, ens.weights, k);
  }
  return out;
}

double RunConfig::dt_limit() const {
  double h = std::min({grid.spacing(0), grid.spacing(1), grid.spacing(2)});
  double limit = h / initial.speed_scale();
  if (omega > 0.0) limit = std::min(limit, 0.05 * 2.0 * kPi / omega);
  return limit;
}

void RunConfig::validate() const {
  initial.validate();
  try {
    grid.validate();
    MagneticConfig check(omega);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (particles == 0) throw ConfigError("run.particles must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("run.dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("run.t_end must be positive");
  if (diag_every == 0) throw ConfigError("diagnostics.diag_every must be >= 1");
  const double limit = dt_limit();
  if (dt > limit * (1.0 + 1e-12)) {
    const std::string which =
        omega > 0.0 && limit == 0.05 * 2.0 * kPi / omega ? "0.05 * 2 pi / omega" : "the CFL limit h / v_scale";
    throw ConfigError("run.dt = " + format_double(dt) + " exceeds " + which + " = " + format_double(limit));
  }
  for (double k : ks) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("diagnostics.ks entries must be finite and >= 0");
  }
  for (double p : field_exponents) {
    if (!(p >= 1.0)) throw ConfigError("diagnostics.field_exponents entries must be >= 1");
  }
}

std::vector<double> time_nodes(double dt, double t_end, const MagneticConfig& mag) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("time_nodes needs dt > 0 and t_end > 0");
  const auto n = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  std::vector<double> nodes;
  nodes.reserve(n + 4);
  for (std::size_t k = 0; k < n; ++k) nodes.push_back(static_cast<double>(k) * dt);
  nodes.push_back(t_end);
  if (mag.magnetized()) {
    const double period = *mag.gyro_period();
    for (std::size_t k = 1; static_cast<double>(k) * period <= t_end * (1.0 + 1e-12); ++k) {
      const double ts = static_cast<double>(k) * period;
      auto it = std::lower_bound(nodes.begin(), nodes.end(), ts);
      auto near = it;
      if (it == nodes.end() || (it != nodes.begin() && ts - *(it - 1) < *it - ts)) near = it - 1;
      if (std::abs(*near - ts) <= 1e-6 * dt) {
        *near = ts;
      } else {
        nodes.insert(it, ts);
      }
    }
  }
  return nodes;
}

Simulation::Simulation(const RunConfig& config) : Simulation(config, sample_initial(config.initial, config.particles, config.seed)) {}

Simulation::Simulation(const RunConfig& config, ParticleEnsemble initial)
    : config_(config),
      mag_(config.omega),
      ens_(std::move(initial)),
      solver_(config.grid, config.field_memory_budget),
      rho_(config.grid),
      e_(config.grid) {
  config_.validate();
  ens_.validate();
  accel_.resize(ens_.size());
  nodes_ = time_nodes(config_.dt, config_.t_end, mag_);
  solve();
}

void Simulation::solve() {
  const auto exec = config_.exec();
  kernels::deposit_cic(exec, config_.grid, ens_.positions, ens_.weights, rho_.values);
  if (config_.self_consistent) {
    e_ = solver_.solve(rho_);
  } else {
    for (auto& c : e_.components) std::fill(c.begin(), c.end(), 0.0);
  }
}

void Simulation::advance() {
  if (done()) throw std::logic_error("simulation already reached t_end");
  const auto exec = config_.exec();
  const double dt = nodes_[index_ + 1] - nodes_[index_];
  kernels::gather_cic(exec, e_, ens_.positions, accel_);
  kernels::kick(exec, ens_.velocities, accel_, 0.5 * dt);
  kernels::free_flow(exec, ens_.positions, ens_.velocities, dt, mag_);
  solve();
  kernels::gather_cic(exec, e_, ens_.positions, accel_);
  kernels::kick(exec, ens_.velocities, accel_, 0.5 * dt);
  ++index_;
  for (std::size_t i = 0; i < ens_.size(); ++i) {
    const Vec3& v = ens_.velocities[i];
    if (!std::isfinite(v[0] + v[1] + v[2])) {
      throw Error("non-finite velocity for particle " + std::to_string(i) + " at t = " + format_double(time()));
    }
  }
}

MomentRecord Simulation::record() const {
  MomentRecord r;
  r.t = time();
  r.m_k = moments(ens_, config_.ks, config_.exec());
  r.energy = energy(ens_, e_);
  std::vector<double> ps = config_.field_exponents;
  ps.push_back(2.0);
  ps.push_back(3.5);
  for (double p : ps) r.e_norms[p] = lp_norm(e_, p);
  r.e_weak32 = weak_lq_norm(e_, 1.5);
  r.rho_max = lp_norm(rho_, kInf);
  return r;
}

RunResult run(const RunConfig& config, const RunObserver& observer) {
  Simulation sim(config);
  RunResult result;
  const auto& nodes = sim.nodes();

  std::vector<std::size_t> snap_at;
  for (double ts : config.snapshot_times) {
    auto it = std::min_element(nodes.begin(), nodes.end(),
                               [ts](double a, double b) { return std::abs(a - ts) < std::abs(b - ts); });
    snap_at.push_back(static_cast<std::size_t>(it - nodes.begin()));
  }
  if (!config.output_dir.empty() && !snap_at.empty()) std::filesystem::create_directories(config.output_dir);

  const std::optional<double> period = config.magnetic().gyro_period();
  auto singular = [&](double t) {
    if (!period || t <= 0.0) return false;
    const double k = std::round(t / *period);
    return k >= 1.0 && t == k * *period;
  };

  for (std::size_t i = 0;; ++i) {
    if (observer) observer(sim);
    if (i % config.diag_every == 0 || sim.done() || singular(sim.time())) result.series.push_back(sim.record());
    if (!config.output_dir.empty() && std::find(snap_at.begin(), snap_at.end(), i) != snap_at.end()) {
      char name[64];
      std::snprintf(name, sizeof(name), "%06zu", i);
      const std::string base = (std::filesystem::path(config.output_dir) / name).string();
      write_snapshot(base + "_rho.mvps", sim.density(), sim.time());
      write_snapshot(base + "_E.mvps", sim.field(), sim.time());
      result.snapshots.push_back(base + "_rho.mvps");
      result.snapshots.push_back(base + "_E.mvps");
    }
    if (sim.done()) break;
    sim.advance();
  }
  result.final_state = sim.ensemble();
  return result;
}

double stability_q(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.size() != b.size()) throw std::invalid_argument("stability_q: ensembles differ in size");
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    q += a.weights[i] * (norm2(a.positions[i] - b.positions[i]) + norm2(a.velocities[i] - b.velocities[i]));
  }
  return 0.5 * q;
}

std::vector<std::pair<double, double>> stability_q(const std::vector<TrajectoryFrame>& a,
                                                   const std::vector<TrajectoryFrame>& b,
                                                   const std::vector<double>& weights) {
  if (a.size() != b.size()) throw std::invalid_argument("stability_q: trajectories differ in length");
  std::vector<std::pair<double, double>> out;
  for (std::size_t f = 0; f < a.size(); ++f) {
    const auto& fa = a[f];
    const auto& fb = b[f];
    if (fa.positions.size() != fb.positions.size() || fa.positions.size() != weights.size() ||
        fa.velocities.size() != weights.size() || fb.velocities.size() != weights.size()) {
      throw std::invalid_argument("stability_q: ensembles differ in size");
    }
    double q = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      q += weights[i] * (norm2(fa.positions[i] - fb.positions[i]) + norm2(fa.velocities[i] - fb.velocities[i]));
    }
    out.emplace_back(fa.t, 0.5 * q);
  }
  return out;
}

std::string exponent_label(double k) {
  if (std::isinf(k)) return "inf";
  std::string s = format_double(k);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

void write_moment_csv(const std::string& path, const MomentSeries& series, const std::vector<double>& ks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << 't';
  for (double k : ks) out << ",M" << exponent_label(k);
  out << ",energy,E_L2,E_L3p5,E_weak32\n";
  auto lookup = [](const std::map<double, double>& m, double key) {
    auto it = m.find(key);
    return it == m.end() ? std::nan("") : it->second;
  };
  for (const auto& r : series) {
    out << format_double(r.t);
    for (double k : ks) out << ',' << format_double(lookup(r.m_k, k));
    out << ',' << format_double(r.energy) << ',' << format_double(lookup(r.e_norms, 2.0)) << ','
        << format_double(lookup(r.e_norms, 3.5)) << ',' << format_double(r.e_weak32) << '\n';
  }
  if (!out) throw Error("failed writing " + path);
}

}  // namespace mvp
