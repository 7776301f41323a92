#include "mvp/pipelines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "mvp/errors.hpp"

namespace mvp::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}

// Run length in units of T_omega, or the configured t_end without field.
double window_time(const RunConfig& rc, double windows) {
  const MagneticConfig mag = rc.magnetic();
  return mag.magnetized() ? windows * *mag.t_omega() : rc.t_end;
}

void write_series(const std::string& out_dir, const std::string& name, const MomentSeries& series,
                  const std::vector<double>& ks, Outcome& o) {
  if (out_dir.empty()) return;
  const std::string path = join(out_dir, name);
  write_moment_csv(path, series, ks);
  o.artifacts.push_back(path);
}

}  // namespace

EstimateReport moments_finite_report(const MomentSeries& series, const std::vector<double>& ks) {
  EstimateReport rep;
  rep.name = "moments.finite";
  rep.threshold = 0.0;
  rep.notes.emplace_back("measure", "count of non-finite M_k, energy or field norms over all outputs");
  for (const auto& r : series) {
    for (double k : ks) {
      auto it = r.m_k.find(k);
      if (it == r.m_k.end()) throw std::invalid_argument("series lacks M_" + exponent_label(k));
      if (!std::isfinite(it->second)) rep.max_ratio += 1.0;
      ++rep.samples;
    }
    if (!std::isfinite(r.energy)) rep.max_ratio += 1.0;
    for (const auto& [p, v] : r.e_norms) {
      if (!std::isfinite(v)) rep.max_ratio += 1.0;
    }
  }
  for (double k : ks) {
    double sup = 0.0;
    for (const auto& r : series) sup = std::max(sup, r.m_k.at(k));
    rep.fitted["sup_M" + exponent_label(k)] = sup;
  }
  rep.fitted["outputs"] = static_cast<double>(series.size());
  rep.finalize();
  return rep;
}

EstimateReport mass_drift_report(const MomentSeries& series, double tol) {
  EstimateReport rep;
  rep.name = "moments.mass_drift";
  rep.threshold = tol;
  rep.notes.emplace_back("measure", "max |M0(t) - M0(0)| / M0(0)");
  if (series.empty() || !series.front().m_k.count(0.0)) throw std::invalid_argument("series lacks M_0");
  const double m0 = series.front().m_k.at(0.0);
  for (const auto& r : series) {
    rep.max_ratio = std::max(rep.max_ratio, std::abs(r.m_k.at(0.0) - m0) / m0);
    ++rep.samples;
  }
  rep.fitted["M0"] = m0;
  rep.finalize();
  return rep;
}

EstimateReport energy_drift_report(const MomentSeries& series, double tol) {
  EstimateReport rep;
  rep.name = "energy.drift";
  rep.threshold = tol;
  rep.notes.emplace_back("measure", "max |energy(t) - energy(0)| / energy(0)");
  if (series.empty()) throw std::invalid_argument("empty series");
  const double e0 = series.front().energy;
  for (const auto& r : series) {
    rep.max_ratio = std::max(rep.max_ratio, std::abs(r.energy - e0) / e0);
    ++rep.samples;
  }
  rep.fitted["energy0"] = e0;
  rep.fitted["energy_final"] = series.back().energy;
  rep.finalize();
  return rep;
}

Outcome simulate(const ExperimentConfig& c, const std::string& out_dir) {
  Outcome o;
  RunConfig rc = c.run;
  rc.output_dir = out_dir;
  const RunResult res = run(rc);
  o.artifacts = res.snapshots;
  write_series(out_dir, "series.csv", res.series, rc.ks, o);
  o.reports.push_back(moments_finite_report(res.series, rc.ks));
  return o;
}

Outcome verify_kinematics(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  harness::KinematicsOptions opt;
  opt.samples = h.kinematics_samples;
  opt.seed = h.kinematics_seed;
  opt.omegas = h.kinematics_omegas;
  Outcome o;
  o.reports = {harness::check_flow_vs_ode(opt),
               harness::check_group_law(opt),
               harness::check_volume_preservation(opt),
               harness::check_speed_invariance(opt),
               harness::check_xstar_identity(opt),
               harness::check_hd_identity(opt),
               harness::check_jacobian(opt, h.jacobian_samples),
               harness::check_omega_continuity(opt),
               harness::check_zeta_factor_bounded()};
  return o;
}

Outcome verify_fields(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  Outcome o;
  o.reports = {harness::check_poisson_convergence(h.poisson_cells), harness::check_weak_norm(h.weak_norm_trials),
               harness::probe_weak_young(), harness::probe_calderon_zygmund()};
  return o;
}

Outcome verify_representation(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  harness::FrozenFieldProblem prob;
  prob.initial = c.run.initial;
  prob.particles = h.representation_particles;
  prob.seed = c.run.seed;
  prob.omega = c.run.omega;
  prob.t = h.representation_time;
  prob.field_charge = h.representation_field_charge;
  prob.field_sigma = h.representation_field_sigma;
  prob.substeps = h.representation_substeps;
  const MagneticConfig mag(prob.omega);
  if (near_singular_time(prob.t, mag)) throw ConfigError("harness.representation_time is a singular time");

  const std::size_t nq = *std::max_element(h.representation_levels.begin(), h.representation_levels.end());
  std::vector<double> weights;
  const auto history = harness::frozen_field_history(prob, nq, &weights);
  const double w = h.representation_half_width;
  const std::size_t n = h.representation_cells;
  const GridSpec eval{{{-w, -w, -w}}, {{2.0 * w, 2.0 * w, 2.0 * w}}, {n, n, n}};
  std::vector<harness::RepresentationResult> results;
  for (std::size_t level : h.representation_levels) {
    results.push_back(harness::representation_mismatch(harness::subsample(history, nq / level), weights, eval, mag));
  }
  Outcome o;
  o.reports.push_back(harness::verify_representation(h.representation_levels, results, h.representation_tol,
                                                     h.representation_min_decrease));

  // Same formula on a self-consistent run: frames at every step, fields
  // gathered from the grid solve. Run length rounded to whole steps so the
  // history is uniform.
  RunConfig rc = c.run;
  rc.particles = h.representation_particles;
  rc.snapshot_times.clear();
  const double target = mag.magnetized() ? 0.5 * *mag.gyro_period() : h.representation_time;
  rc.t_end = std::max(1.0, std::round(target / rc.dt)) * rc.dt;
  Simulation sim(rc);
  std::vector<harness::RepresentationFrame> frames{harness::capture_frame(sim)};
  while (!sim.done()) {
    sim.advance();
    frames.push_back(harness::capture_frame(sim));
  }
  EstimateReport sc = harness::verify_representation({frames.size() - 1},
                                                     {harness::representation_mismatch(frames, sim.ensemble().weights,
                                                                                       eval, mag)},
                                                     h.representation_tol, 1.0);
  sc.name = "representation.self_consistent";
  o.reports.push_back(sc);
  return o;
}

Outcome verify_inequalities(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  Outcome o;
  o.reports = harness::verify_moment_interpolation(h.interpolation_trials, h.interpolation_seed);
  o.reports.push_back(harness::check_lineq1(h.lineq_trials));
  Outcome split = verify_time_split(c);
  o.reports.insert(o.reports.end(), split.reports.begin(), split.reports.end());
  return o;
}

Outcome verify_time_split(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  Outcome o;
  const MagneticConfig mag = c.run.magnetic();
  const double unit = mag.magnetized() ? 1.0 / mag.omega() : 1.0;
  std::vector<double> t0_grid = log_grid(1e-3 * unit, kPi * unit, h.small_time_points);
  for (double d : h.small_time_d) {
    o.reports.push_back(harness::verify_small_time_bound(mag, d, t0_grid, h.small_time_factor));
  }
  if (mag.magnetized()) {
    const double t = *mag.t_omega();
    std::vector<double> grid = log_grid(1e-3 * t, 0.5 * t, h.large_time_points);
    o.reports.push_back(harness::verify_large_time_log(mag, grid, t, h.large_time_bound));
  }

  harness::EstimateReport t0;
  t0.name = "inequalities.t0_rule";
  t0.threshold = h.t0_tol;
  t0.notes.emplace_back("measure", "max back-substitution residual of select_t0");
  std::mt19937_64 rng(h.interpolation_seed + 1);
  std::uniform_real_distribution<double> lt(-3.0, 1.0), lmu(-2.0, 8.0), uk(3.0, 6.0);
  std::uniform_int_distribution<std::size_t> pick(0, h.small_time_d.size() - 1);
  for (std::size_t i = 0; i < h.t0_samples; ++i) {
    const double t = std::pow(10.0, lt(rng)), mu = std::pow(10.0, lmu(rng)), k = uk(rng);
    const double d = h.small_time_d[pick(rng)];
    t0.max_ratio = std::max(t0.max_ratio, harness::select_t0_residual(t, mu, k, d));
    ++t0.samples;
  }
  t0.finalize();
  o.reports.push_back(t0);
  return o;
}

Outcome verify_gronwall(const ExperimentConfig& c, const std::string& out_dir) {
  const HarnessConfig& h = c.harness;
  RunConfig rc = c.run;
  rc.output_dir = out_dir;
  const RunResult res = run(rc);
  Outcome o;
  o.artifacts = res.snapshots;
  write_series(out_dir, "series.csv", res.series, rc.ks, o);
  const MagneticConfig mag = rc.magnetic();
  o.reports.push_back(moments_finite_report(res.series, h.gronwall_ks));
  for (double k : h.gronwall_ks) {
    o.reports.push_back(
        harness::gronwall_report(harness::fit_gronwall_envelope(res.series, k, mag, h.gronwall_cap), k, h.gronwall_cap));
  }
  o.reports.push_back(mass_drift_report(res.series, h.mass_drift_tol));
  o.reports.push_back(energy_drift_report(res.series, h.energy_drift_tol));
  o.reports.push_back(harness::verify_field_estimates(res.series, h.field_estimate_k, mag));
  return o;
}

Outcome verify_stability(const ExperimentConfig& c, const std::string& out_dir) {
  const HarnessConfig& h = c.harness;
  RunConfig rc = c.run;
  rc.t_end = window_time(rc, h.stability_windows);
  rc.output_dir.clear();
  rc.snapshot_times.clear();
  ParticleEnsemble shifted = sample_initial(rc.initial, rc.particles, rc.seed);
  for (Vec3& x : shifted.positions) x[0] += h.stability_delta;
  Simulation a(rc);
  Simulation b(rc, std::move(shifted));
  std::vector<std::pair<double, double>> q{{a.time(), stability_q(a.ensemble(), b.ensemble())}};
  while (!a.done()) {
    a.advance();
    b.advance();
    q.emplace_back(a.time(), stability_q(a.ensemble(), b.ensemble()));
  }
  Outcome o;
  if (!out_dir.empty()) {
    const std::string path = join(out_dir, "stability.csv");
    std::ofstream out(path);
    out << "t,Q\n";
    for (const auto& [t, v] : q) out << fmt(t) << "," << fmt(v) << "\n";
    o.artifacts.push_back(path);
  }
  o.reports.push_back(harness::verify_stability_envelope(q, h.stability_ceiling, h.stability_cap));
  return o;
}

Outcome verify_decay(const ExperimentConfig& c, const std::string& out_dir) {
  const HarnessConfig& h = c.harness;
  RunConfig rc = c.run;
  rc.t_end = window_time(rc, h.decay_windows);
  rc.output_dir = out_dir;
  harness::DecayProfile profile;
  try {
    profile = harness::decay_profile_for(rc.initial);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("verify-decay: ") + e.what());
  }
  harness::DecayChecker checker(profile);
  const RunResult res =
      run(rc, [&](const Simulation& sim) { checker.observe(sim.time(), sim.ensemble(), sim.field()); });
  Outcome o;
  o.artifacts = res.snapshots;
  write_series(out_dir, "decay_series.csv", res.series, rc.ks, o);
  o.reports.push_back(checker.report());
  if (h.check_bounded_density) {
    Outcome b = verify_bounded_density(c);
    o.reports.insert(o.reports.end(), b.reports.begin(), b.reports.end());
  }
  return o;
}

Outcome verify_bounded_density(const ExperimentConfig& c) {
  const HarnessConfig& h = c.harness;
  RunConfig rc = c.run;
  rc.initial.family = "compact-bump";
  rc.t_end = window_time(rc, 1.0);
  rc.output_dir.clear();
  rc.snapshot_times.clear();
  rc.validate();
  double field_bound = 0.0;
  std::vector<std::pair<double, double>> rho_max;
  run(rc, [&](const Simulation& sim) {
    field_bound = std::max(field_bound, lp_norm(sim.field(), kInf));
    rho_max.emplace_back(sim.time(), lp_norm(sim.density(), kInf));
  });
  std::vector<double> t_grid(h.bounded_density_t_points);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    t_grid[i] = rc.t_end * static_cast<double>(i) / static_cast<double>(t_grid.size() - 1);
  }
  const double a = rc.initial.bump_radius_x;
  std::vector<Vec3> x_grid;
  for (double r : {0.0, 0.5 * a, a, 1.5 * a}) {
    x_grid.push_back(rc.initial.center + Vec3{{r, 0.0, 0.0}});
    if (r > 0.0) x_grid.push_back(rc.initial.center + Vec3{{0.0, 0.0, r}});
  }
  Outcome o;
  o.reports.push_back(harness::verify_bounded_density_condition(rc.initial, rc.magnetic(), field_bound, t_grid, x_grid,
                                                                rho_max, h.bounded_density_factor));
  return o;
}

std::vector<SingularityRow> singularity_table(const MagneticConfig& mag, std::size_t points, std::size_t decades,
                                              double d) {
  if (!mag.magnetized()) throw ConfigError("scan-singularity needs mag.omega > 0 (no singular times at omega = 0)");
  const double period = *mag.gyro_period();
  std::vector<double> s;
  for (std::size_t i = 0; i < points; ++i) s.push_back((static_cast<double>(i) + 0.5) * 2.0 * period / points);
  // half turns, where 1 - cos = 2
  s.push_back(0.5 * period);
  s.push_back(1.5 * period);
  constexpr int per_decade = 10;
  for (std::size_t j = per_decade; j <= decades * per_decade; ++j) {
    const double eps = std::pow(10.0, -static_cast<double>(j) / per_decade);
    s.push_back(period * (1.0 - eps));
    s.push_back(period * (1.0 + eps));
  }
  std::sort(s.begin(), s.end());
  std::vector<SingularityRow> rows;
  for (double x : s) {
    if (near_singular_time(x, mag)) continue;
    rows.push_back({x, jacobian_psi_abs(x, mag), singular_amplification(x, mag), zeta(x, mag, d)});
  }
  return rows;
}

Outcome scan_singularity(const ExperimentConfig& c, const std::string& out_dir) {
  const auto rows =
      singularity_table(c.run.magnetic(), c.harness.scan_points, c.harness.scan_refine_decades);
  Outcome o;
  if (!out_dir.empty()) {
    const std::string path = join(out_dir, "singularity.csv");
    std::ofstream out(path);
    out << "s,jacobian_psi_abs,singular_amplification,zeta\n";
    for (const auto& r : rows) {
      out << fmt(r.s) << "," << fmt(r.jacobian) << "," << fmt(r.amplification) << "," << fmt(r.zeta) << "\n";
    }
    o.artifacts.push_back(path);
  }
  return o;
}

}  // namespace mvp::pipeline
