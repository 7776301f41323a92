#pragma once

// Experiment configuration: a flat sectioned key/value text format.
//
//   # comment
//   [section]
//   key = value        number, integer, true/false, bare word or "quoted", [a, b, c]
//
// Every key has a default; the grammar and key list live in docs/config.md.

#include <cstdint>
#include <string>
#include <vector>

#include "mvp/ensemble.hpp"

namespace mvp {

struct HarnessConfig {
  // kinematics
  std::size_t kinematics_samples = 1000;
  std::uint64_t kinematics_seed = 11;
  std::vector<double> kinematics_omegas{0.1, 1.0, 10.0};
  std::size_t jacobian_samples = 200;
  // fields and inequalities
  std::vector<std::size_t> poisson_cells{32, 64, 128};
  std::size_t weak_norm_trials = 20;
  std::size_t lineq_trials = 100;
  std::size_t interpolation_trials = 1000;
  std::uint64_t interpolation_seed = 21;
  std::vector<double> small_time_d{2.0, 3.0, 3.5, 3.75};
  std::size_t small_time_points = 40;
  double small_time_factor = 2.0;
  std::size_t large_time_points = 40;
  double large_time_bound = 2.0 * 1.5874010519681994;
  std::size_t t0_samples = 200;
  double t0_tol = 1e-12;
  // moment propagation
  std::vector<double> gronwall_ks{2.0, 3.5, 4.0, 6.0};
  double gronwall_cap = 1e3;
  double field_estimate_k = 4.0;
  double mass_drift_tol = 1e-14;
  double energy_drift_tol = 1e-3;
  // stability
  double stability_delta = 1e-6;
  double stability_windows = 1.0;  // run length in units of T_omega
  double stability_ceiling = 1e-3;
  double stability_cap = 1e3;
  // decay and bounded density
  double decay_windows = 1.0;
  bool check_bounded_density = true;
  double bounded_density_factor = 3.0;
  std::size_t bounded_density_t_points = 9;
  // representation
  std::vector<std::size_t> representation_levels{16, 32, 64};
  std::size_t representation_cells = 16;
  double representation_half_width = 8.0;
  std::size_t representation_particles = 20000;
  double representation_time = 1.5707963267948966;
  double representation_field_charge = 4.0;
  double representation_field_sigma = 1.0;
  std::size_t representation_substeps = 8;
  double representation_tol = 0.1;
  double representation_min_decrease = 1.5;
  // singularity scan
  std::size_t scan_points = 400;
  std::size_t scan_refine_decades = 6;

  bool operator==(const HarnessConfig&) const = default;
};

struct ExperimentConfig {
  RunConfig run;
  HarnessConfig harness;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// `overrides` are "section.key=value" strings applied after the file.
ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});
// Every key, defaults included; parse_config_text(format_config(c)) == c.
std::string format_config(const ExperimentConfig& c);
// Dotted names of every accepted key.
std::vector<std::string> config_keys();

}  // namespace mvp
