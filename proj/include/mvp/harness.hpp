#pragma once

// Numerical checks of the moment-propagation estimates. Analytic constants
// are non-explicit, so most checks fit a constant and test the shape of a
// bound; each report states what its max_ratio measures.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mvp/ensemble.hpp"
#include "mvp/fields.hpp"
#include "mvp/kinematics.hpp"

namespace mvp::harness {

struct EstimateReport {
  std::string name;
  std::size_t samples = 0;
  // Worst observed value of the checked quantity (an error, a ratio LHS/RHS,
  // a violation count or a fitted constant, depending on the check).
  double max_ratio = 0.0;
  double threshold = 0.0;
  std::map<std::string, double> fitted;
  std::vector<std::pair<std::string, std::string>> notes;
  bool pass = false;

  // pass = max_ratio finite and <= threshold. Returns pass.
  bool finalize();
};

// One key=value line per field, prefixed by the report name.
std::string format_report(const EstimateReport& r);
void write_reports(const std::string& path, const std::vector<EstimateReport>& reports);
// CSV: name,samples,max_ratio,fitted_C,pass
void write_summary_csv(const std::string& path, const std::vector<EstimateReport>& reports);
bool all_pass(const std::vector<EstimateReport>& reports);

// ---------------------------------------------------------------- kinematics

struct KinematicsOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 11;
  std::vector<double> omegas{0.1, 1.0, 10.0};
};

// flow() over one gyro-period against an adaptive Dormand-Prince integration
// of x' = v, v' = v ^ B. max_ratio: max relative phase-space error.
EstimateReport check_flow_vs_ode(const KinematicsOptions& opt);
// flow(s2; s1, flow(s1; t, p)) = flow(s2; t, p).
EstimateReport check_group_law(const KinematicsOptions& opt);
// |det D_p flow - 1| for the 6x6 finite-difference Jacobian.
EstimateReport check_volume_preservation(const KinematicsOptions& opt);
EstimateReport check_speed_invariance(const KinematicsOptions& opt);
// X(s; t, x, v) = X*(t - s, x, phi(v)) for 0 <= s <= t.
EstimateReport check_xstar_identity(const KinematicsOptions& opt);
// kernel_d(t - s, s, e) = kernel_h(t, t - s, e).
EstimateReport check_hd_identity(const KinematicsOptions& opt);
// jacobian_psi_abs against a finite-difference determinant of v -> X*.
EstimateReport check_jacobian(const KinematicsOptions& opt, std::size_t samples = 200);
// All operations at omega = 1e-8 against the omega = 0 branch.
EstimateReport check_omega_continuity(const KinematicsOptions& opt);
// sup over (0, pi] of (s^2 / (1 - cos s))^{1/d}, expected at s = pi.
EstimateReport check_zeta_factor_bounded(const std::vector<double>& ds = {2.0, 3.0, 3.5, 3.75});
std::vector<EstimateReport> verify_kinematics(const KinematicsOptions& opt);

// -------------------------------------------------------------------- fields

// Q(< r) / (4 pi r^2) for a Gaussian of total charge q and width sigma, with
// Q(< r) from 1D quadrature of 4 pi r^2 rho(r).
double gaussian_radial_field(double r, double sigma, double charge = 1.0);

struct ConvergenceLevel {
  std::size_t cells = 0;
  double h = 0.0;
  double l2_error = 0.0;  // relative discrete L2 error against the radial oracle
};

// Gaussian blob of width sigma centred in [-half_width, half_width]^3.
std::vector<ConvergenceLevel> gaussian_blob_convergence(const std::vector<std::size_t>& cells,
                                                        double half_width = 8.0, double sigma = 1.0);
// max_ratio: 1 / (smallest error ratio per refinement); threshold 1 / 3.5.
EstimateReport check_poisson_convergence(const std::vector<std::size_t>& cells = {32, 64, 128});

// sup over all subsets of the nonzero cells (at most 24) of |A|^{-1/q'} int_A |f|.
double weak_norm_bruteforce(const ScalarField& f, double q);
// max_ratio: max relative difference to the subset oracle over random 4^3
// fields with at most 12 nonzero cells.
EstimateReport check_weak_norm(std::size_t trials = 20, std::uint64_t seed = 5,
                               const std::vector<double>& qs = {1.5, 2.0});
// int |g h| <= 3 (3/2)^{2/3} ||g||_1^{1/3} ||g||_inf^{2/3} ||h||_{3/2,w}.
// max_ratio: violation count.
EstimateReport check_lineq1(std::size_t trials = 100, std::uint64_t seed = 9);
// Weak-L^{3/2} norm of |grad K3| = 1 / (4 pi |x|^2): (3 / (4 pi))^{1/3}.
double coulomb_gradient_weak_norm();
// ||f * grad K3||_r / (||f||_p ||grad K3||_{3/2,w}) with 1/r = 1/p - 1/3
// over random blobs and dilations. max_ratio: largest ratio.
EstimateReport probe_weak_young(std::size_t trials = 12, std::uint64_t seed = 13, double bound = 10.0);
// ||d_i d_j K3 * g||_p / ||g||_p for p = 2, 4; derivatives of the solved
// field by centred differences. max_ratio: largest ratio.
EstimateReport probe_calderon_zygmund(std::size_t trials = 8, std::uint64_t seed = 17, double bound = 10.0);
std::vector<EstimateReport> verify_fields();

// -------------------------------------------------------------- inequalities

// One draw of the moment-interpolation inequality on a random phase grid.
struct InterpolationSample {
  double k = 0.0, kp = 0.0, p = 0.0, r = 0.0;
  double lhs = 0.0;  // ||m_{k'}||_r
  double rhs = 0.0;  // ||f||_p^{(k-k')/(k+3/q)} M_k^{(k'+3/q)/(k+3/q)}
  double ratio() const { return lhs / rhs; }
};

// Phase-space samples of f >= 0 on an nx^3 x nv^3 grid.
struct PhaseGrid {
  std::size_t nx = 4, nv = 5;
  double hx = 0.5, hv = 0.4;  // velocity cells centred on a symmetric lattice
  std::vector<double> f;      // index (a * nv^3 + b)

  double speed(std::size_t b) const;
  // f_lambda(x, v) = f(x, v / lambda): same values, velocity lattice scaled.
  PhaseGrid dilate_velocity(double lambda) const;
  PhaseGrid scale_mass(double c) const;
};

PhaseGrid random_phase_grid(std::uint64_t seed);
// r = (k + 3/q) / (k' + 3/q) with 1/p + 1/q = 1; throws std::invalid_argument
// if k' > k or the exponents are out of range.
InterpolationSample interpolation_sample(const PhaseGrid& g, double k, double kp, double p);
// M_l / (||f||_1^{(k-l)/k} M_k^{l/k}); at most 1 by Hoelder.
double est_ml_ratio(const PhaseGrid& g, double k, double l);

struct InterpolationStudy {
  double max_ratio = 0.0;
  double max_scaling_defect = 0.0;  // relative change of the ratio under dilation / mass scaling
  double max_est_ml_ratio = 0.0;
  std::size_t trials = 0;
};
InterpolationStudy run_interpolation_trials(std::size_t trials, std::uint64_t seed);
// Three reports over `trials` draws plus a 10x set with another seed:
//   inequalities.ineq_mk    max ratio, threshold 1.1 x the max of the 10x set
//   inequalities.scaling    max relative ratio change under v-dilation and
//                           mass scaling, threshold 1e-10
//   inequalities.est_ml     max ratio, threshold 1
std::vector<EstimateReport> verify_moment_interpolation(std::size_t trials = 1000, std::uint64_t seed = 21);

// ------------------------------------------------------- small / large time

// l with (k + 3) / d' = (l + 3) / 3, 1/d + 1/d' = 1.
double derived_l(double k, double d);
// t (1 + mu_k)^{-3 (l + 3) / ((k + 3)^2 (2 - 3/d))}; throws for d <= 3/2.
double select_t0(double t, double mu_k, double k, double d);
// |(t0 / t)^{2-3/d} (1 + mu_k)^{3 (l+3) / (k+3)^2} - 1|
double select_t0_residual(double t, double mu_k, double k, double d);

// int_0^{t0} zeta_rescaled(s) ds by tanh-sinh quadrature. Equals
// omega^{3/d - 2} I(omega t0) with I(u0) = int_0^{u0} u^{1-3/d} (u^2 / (2 (1 - cos u)))^{1/d} du.
double small_time_integral(const MagneticConfig& mag, double d, double t0);
// ratio(t0) = small_time_integral / t0^{2-3/d} = I(u0) / u0^{2-3/d}, which
// does not depend on omega at fixed u0 = omega t0. max_ratio is max / min of
// the ratio over the grid, threshold `factor`. Throws std::invalid_argument
// for omega t0 > pi.
EstimateReport verify_small_time_bound(const MagneticConfig& mag, double d, const std::vector<double>& t0_grid,
                                       double factor = 2.0);
// int_{t0}^{t} (1/s) (s^2 / (1 - cos s))^{2/3} ds in rescaled time u = omega s.
double large_time_integral(const MagneticConfig& mag, double t0, double t);
// max_ratio: max of integral / ln(t / t0) over t0_grid; threshold `bound`.
EstimateReport verify_large_time_log(const MagneticConfig& mag, const std::vector<double>& t0_grid, double t,
                                     double bound = 2.0 * 1.5874010519681994);

// ------------------------------------------------------------------ Gronwall

struct GronwallFit {
  std::size_t window = 0;
  double t_begin = 0.0, t_end = 0.0;
  double C = 0.0;
  bool finite = true;  // false when no C <= cap works
  std::vector<std::pair<double, double>> envelope;  // (t, envelope(t)) at the samples
};

// y: samples (t, y(t)) with y >= 1 nondecreasing. Least C per window
// [p T, (p+1) T] such that ln y(t) <= C T e^{C tau} + e^{C tau} ln y(pT),
// tau = t - pT, found by bisection to `tol`.
std::vector<GronwallFit> fit_gronwall_envelope(const std::vector<std::pair<double, double>>& y, double window,
                                               double cap = 1e3, double tol = 1e-9);
// y = 1 + running sup of M_k from a series; window = T_omega.
std::vector<GronwallFit> fit_gronwall_envelope(const MomentSeries& series, double k, const MagneticConfig& mag,
                                               double cap = 1e3);
EstimateReport gronwall_report(const std::vector<GronwallFit>& fits, double k, double cap = 1e3);

// ----------------------------------------------------------- run-based checks

// (a) sup_t ||E||_p over the stored p grid in (3/2, 15/4]; (b) the constant in
// ||E||_{k+3} <= C (1 + mu_k)^{1/(k+3)} (1 + ln(1 + mu_k)); (c) the energy
// identity ||E||_2 <= sqrt(2 energy(0)). Field fits skip a band of 1e-3 T_omega
// around singular times. max_ratio: max ||E||_2 / sqrt(2 energy(0)).
EstimateReport verify_field_estimates(const MomentSeries& series, double k, const MagneticConfig& mag);

// Least C >= 0 with 1 + ln(1/Q(t)) >= (1 + ln(1/Q0)) e^{-C t}. An all-zero
// series is reported as trivially stable. max_ratio: max(Q(T) / ceiling,
// C / cap), threshold 1.
EstimateReport verify_stability_envelope(const std::vector<std::pair<double, double>>& q, double ceiling = 1e-3,
                                         double cap = 1e3);

// h(r) = c (1 + r)^{-alpha}.
struct DecayProfile {
  double c = 1.0;
  double alpha = 4.0;
  double operator()(double r) const;
};
// Smallest c with f_in(x, v) <= c (1 + |v|)^{-4} everywhere.
DecayProfile decay_profile_for(const DistributionSpec& spec);

// Accumulates tags and velocities over a run and counts violations of
// tag <= h(max(0, |v(t)| - A_T t)) with A_T = max ||E(t)||_inf.
class DecayChecker {
 public:
  explicit DecayChecker(DecayProfile h);
  void observe(double t, const ParticleEnsemble& ens, const VectorField& e);
  EstimateReport report() const;

 private:
  DecayProfile h_;
  std::vector<double> times_;
  std::vector<std::vector<double>> speeds_;
  std::vector<double> tags_;
  double a_t_ = 0.0;
};

// g(t, x, v) for an analytic family: sup of f_in(y + v t, w) over
// |y - x| <= (R + omega |v|) t^2 e^{omega t}, |w - v| <= (R + omega |v|) t e^{omega t}.
double envelope_g(const DistributionSpec& spec, const MagneticConfig& mag, double field_bound, double t,
                  const Vec3& x, const Vec3& v);
// int g dv; +infinity when g stays positive as |v| -> infinity, which
// happens exactly when omega t e^{omega t} >= 1.
double envelope_integral(const DistributionSpec& spec, const MagneticConfig& mag, double field_bound, double t,
                         const Vec3& x);
// sup over the (t, x) grid of int g dv must be finite and the observed
// ||rho(t)||_inf at most `factor` times it. max_ratio: max rho / sup int g.
EstimateReport verify_bounded_density_condition(const DistributionSpec& spec, const MagneticConfig& mag,
                                                double field_bound, const std::vector<double>& t_grid,
                                                const std::vector<Vec3>& x_grid,
                                                const std::vector<std::pair<double, double>>& rho_max,
                                                double factor = 3.0);

// ----------------------------------------------------------- representation

// Particle state at one quadrature node, with the field acting on each
// particle.
struct RepresentationFrame {
  double t = 0.0;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> fields;
};

struct RepresentationResult {
  double mismatch = 0.0;        // ||rho_0 + div F - rho||_1 / ||rho||_1
  double transport_only = 0.0;  // ||rho_0 - rho||_1 / ||rho||_1
  double integral_term = 0.0;   // ||div F||_1 / ||rho||_1
};

// Quadratic-spline density deposit (support 2 h per axis); needs a 2-cell
// margin. The vector deposit uses the linear hat along the component axis, so
// its centred-difference divergence is the exact derivative of the scalar
// deposit.
ScalarField deposit_spline(const GridSpec& grid, const std::vector<Vec3>& pos, const std::vector<double>& w);

// rho_rep(t) = rho_0(t) + div int_0^t sum_i w_i (H_t E_i)(s) delta(X(t; s, x_i(s), v_i(s)))
// with the trapezoid rule over the uniformly spaced history frames; the last
// frame is the evaluation time t. Throws SingularTimeError near 2 pi k / omega
// and std::invalid_argument on an empty history.
RepresentationResult representation_mismatch(const std::vector<RepresentationFrame>& history,
                                             const std::vector<double>& weights, const GridSpec& eval_grid,
                                             const MagneticConfig& mag);

// Particles moving in the static Coulomb field of a Gaussian charge
// (no self-consistency).
struct FrozenFieldProblem {
  DistributionSpec initial;
  std::size_t particles = 20000;
  std::uint64_t seed = 3;
  double omega = 1.0;
  double t = 1.5707963267948966;
  double field_charge = 4.0;
  double field_sigma = 1.0;
  std::size_t substeps = 8;  // integrator steps per finest quadrature interval
};

Vec3 gaussian_coulomb_field(const Vec3& x, double sigma, double charge);
// History with nq + 1 frames.
std::vector<RepresentationFrame> frozen_field_history(const FrozenFieldProblem& prob, std::size_t nq,
                                                      std::vector<double>* weights);
// Every `stride`-th frame.
std::vector<RepresentationFrame> subsample(const std::vector<RepresentationFrame>& history, std::size_t stride);

// State of a running simulation as a frame; fields are CIC-gathered.
RepresentationFrame capture_frame(const Simulation& sim);

// Mismatch at each nq; passes when the finest is <= tol and every doubling
// shrinks the mismatch by >= min_decrease. max_ratio: the larger of
// finest / tol and min_decrease / (smallest decrease factor), threshold 1.
EstimateReport verify_representation(const std::vector<std::size_t>& nq_levels,
                                     const std::vector<RepresentationResult>& results, double tol = 0.1,
                                     double min_decrease = 1.5);

}  // namespace mvp::harness
