#pragma once

// Initial data, the particle time integrator and per-step diagnostics.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvp/fields.hpp"
#include "mvp/grid.hpp"
#include "mvp/kernels.hpp"
#include "mvp/kinematics.hpp"
#include "mvp/particles.hpp"

namespace mvp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Analytic initial density. Families:
//   maxwellian    mass * G_sigma(x - center) * M_T(v)
//   two-stream    mass * G_sigma(x - center) * (M_T(v - u) + M_T(v + u)) / 2, u = drift e_3
//   compact-bump  A (1 - |x - center|^2/a^2)_+^2 (1 - |v|^2/b^2)_+^2
// with G_sigma, M_T normalized Gaussians of variance sigma^2 and T.
struct DistributionSpec {
  std::string family = "maxwellian";
  double mass = 1.0;
  Vec3 center{};
  double sigma_x = 1.0;
  double temperature = 0.04;
  double drift = 0.0;
  double bump_radius_x = 2.0;
  double bump_radius_v = 0.5;

  // Throws ConfigError for an unknown family or non-positive parameters.
  void validate() const;
  double density(const Vec3& x, const Vec3& v) const;
  // sup over phase space of density().
  double sup() const;
  // Speed that bounds (compact bump) or practically bounds the sampled speeds.
  double speed_scale() const;

  bool operator==(const DistributionSpec&) const = default;
};

// N markers with uniform weights mass / n, tagged with f_in. Deterministic in
// the seed (std::mt19937_64).
ParticleEnsemble sample_initial(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

// Strang step in a field frozen over the step: half kick with E(x), exact
// E = 0 flow over dt, half kick with E at the new positions.
void step(ParticleEnsemble& ens, const VectorField& e, double dt, const MagneticConfig& mag,
          kernels::Exec exec = kernels::Exec::parallel);

// k -> sum_i w_i |v_i|^k
std::map<double, double> moments(const ParticleEnsemble& ens, const std::vector<double>& ks,
                                 kernels::Exec exec = kernels::Exec::parallel);

struct MomentRecord {
  double t = 0.0;
  std::map<double, double> m_k;
  double energy = 0.0;
  std::map<double, double> e_norms;  // p -> ||E||_p, p = kInf for the max norm
  double e_weak32 = 0.0;
  double rho_max = 0.0;
};

using MomentSeries = std::vector<MomentRecord>;

inline const std::vector<double> kDefaultMomentExponents{0.0, 1.0, 2.0, 3.0, 3.5, 4.0, 6.0};
inline const std::vector<double> kDefaultFieldExponents{2.0, 3.0, 3.5, 3.75, 7.0, kInf};

struct RunConfig {
  DistributionSpec initial;
  std::size_t particles = 100000;
  std::uint64_t seed = 1;
  GridSpec grid{{{-20.0, -20.0, -20.0}}, {{40.0, 40.0, 40.0}}, {64, 64, 64}};
  double omega = 1.0;
  double dt = 0.0628318530717958648;
  double t_end = 9.42477796076937972;
  std::vector<double> ks = kDefaultMomentExponents;
  std::vector<double> field_exponents = kDefaultFieldExponents;
  std::size_t diag_every = 1;
  std::vector<double> snapshot_times;
  std::string output_dir;
  bool deterministic = false;
  // false runs in neutral debug mode: E is forced to 0.
  bool self_consistent = true;
  std::size_t field_memory_budget = kDefaultFieldMemoryBudget;

  MagneticConfig magnetic() const { return MagneticConfig(omega); }
  kernels::Exec exec() const { return deterministic ? kernels::Exec::deterministic : kernels::Exec::parallel; }
  // Largest admissible dt: min(0.05 * 2 pi / omega, h_min / speed scale).
  double dt_limit() const;
  // Throws ConfigError naming the violated invariant.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Output times: multiples of dt up to t_end (t_end included) with every
// singular time 2 pi k / omega inside (0, t_end] inserted.
std::vector<double> time_nodes(double dt, double t_end, const MagneticConfig& mag);

// Self-consistent particle-in-cell integrator. Each step is
//   v += dt/2 E(x_n);  (x, v) <- exact flow over dt;  E_{n+1} from x_{n+1};
//   v += dt/2 E_{n+1}(x_{n+1})
// so one field solve per step.
class Simulation {
 public:
  explicit Simulation(const RunConfig& config);
  Simulation(const RunConfig& config, ParticleEnsemble initial);

  const RunConfig& config() const { return config_; }
  const ParticleEnsemble& ensemble() const { return ens_; }
  const ScalarField& density() const { return rho_; }
  const VectorField& field() const { return e_; }
  double time() const { return nodes_[index_]; }
  const std::vector<double>& nodes() const { return nodes_; }
  bool done() const { return index_ + 1 >= nodes_.size(); }

  // Advance to the next output node. Throws DomainError if a particle leaves
  // the grid and mvp::Error on non-finite state.
  void advance();
  MomentRecord record() const;

 private:
  void solve();

  RunConfig config_;
  MagneticConfig mag_;
  ParticleEnsemble ens_;
  FreeSpacePoissonSolver solver_;
  ScalarField rho_;
  VectorField e_;
  std::vector<Vec3> accel_;
  std::vector<double> nodes_;
  std::size_t index_ = 0;
};

// Called after every node (including t = 0) with the current state.
using RunObserver = std::function<void(const Simulation&)>;

struct RunResult {
  MomentSeries series;
  ParticleEnsemble final_state;
  std::vector<std::string> snapshots;
};

// Runs config to t_end, recording every diag_every-th node, the last node and
// every singular time. Snapshots (density and field) are written to
// output_dir at the nodes nearest the requested snapshot times.
RunResult run(const RunConfig& config, const RunObserver& observer = {});

// Q = 1/2 sum w_i (|X_a - X_b|^2 + |V_a - V_b|^2), with a's weights.
double stability_q(const ParticleEnsemble& a, const ParticleEnsemble& b);

struct TrajectoryFrame {
  double t = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
};

// Q(t) for two stored trajectories sampled at the same times.
std::vector<std::pair<double, double>> stability_q(const std::vector<TrajectoryFrame>& a,
                                                   const std::vector<TrajectoryFrame>& b,
                                                   const std::vector<double>& weights);

// Column name for exponent k: 3.5 -> "3p5".
std::string exponent_label(double k);
// CSV with header t,M<k>...,energy,E_L2,E_L3p5,E_weak32 and shortest
// round-trip formatting of every value.
void write_moment_csv(const std::string& path, const MomentSeries& series, const std::vector<double>& ks);

}  // namespace mvp
