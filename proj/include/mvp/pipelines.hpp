#pragma once

// One function per CLI subcommand. Each returns the reports it produced;
// when `out_dir` is non-empty, artifacts (CSV series, snapshots, tables) are
// written there. The CLI adds the config echo, reports and manifest.

#include <string>
#include <vector>

#include "mvp/config.hpp"
#include "mvp/harness.hpp"

namespace mvp::pipeline {

using harness::EstimateReport;

struct Outcome {
  std::vector<EstimateReport> reports;
  std::vector<std::string> artifacts;  // paths written
};

// Self-consistent run; report: every moment and field norm finite.
Outcome simulate(const ExperimentConfig& c, const std::string& out_dir);
Outcome verify_kinematics(const ExperimentConfig& c);
Outcome verify_fields(const ExperimentConfig& c);
Outcome verify_representation(const ExperimentConfig& c);
// Moment interpolation, the explicit-constant field inequality, and the
// small / large-time split with the t0 rule.
Outcome verify_inequalities(const ExperimentConfig& c);
// The small / large-time part of verify_inequalities.
Outcome verify_time_split(const ExperimentConfig& c);
// Moment propagation: finiteness, Gronwall windows, mass and energy drift,
// field estimates.
Outcome verify_gronwall(const ExperimentConfig& c, const std::string& out_dir);
Outcome verify_stability(const ExperimentConfig& c, const std::string& out_dir);
// Decay envelope on a tagged run, plus the bounded-density condition on a
// compact-bump run when harness.check_bounded_density is set.
Outcome verify_decay(const ExperimentConfig& c, const std::string& out_dir);
Outcome verify_bounded_density(const ExperimentConfig& c);
// Writes singularity.csv; throws ConfigError for omega = 0.
Outcome scan_singularity(const ExperimentConfig& c, const std::string& out_dir);

// Rows (s, jacobian_psi_abs, singular_amplification, zeta) on (0, 4 pi / omega):
// a uniform grid plus a log grid approaching 2 pi / omega from both sides.
struct SingularityRow {
  double s, jacobian, amplification, zeta;
};
std::vector<SingularityRow> singularity_table(const MagneticConfig& mag, std::size_t points, std::size_t decades,
                                              double d = 3.5);

// Reports built from a finished moment series.
EstimateReport moments_finite_report(const MomentSeries& series, const std::vector<double>& ks);
EstimateReport mass_drift_report(const MomentSeries& series, double tol);
EstimateReport energy_drift_report(const MomentSeries& series, double tol);

}  // namespace mvp::pipeline
