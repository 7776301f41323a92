#pragma once

// Closed-form characteristics of the Vlasov equation in the uniform axial
// field B = (0, 0, omega), the rotation change of variables, the kernels that
// appear in the density representation, and the Jacobian / singularity factors
// of the map v -> X*(s, x, v).
//
// Every function here is pure. omega = 0 is a regular branch (free streaming).

#include <optional>

#include "mvp/vec3.hpp"

namespace mvp {

class MagneticConfig {
 public:
  MagneticConfig() = default;
  explicit MagneticConfig(double omega);

  double omega() const { return omega_; }
  bool magnetized() const { return omega_ > 0.0; }
  // Safe window length pi / omega; empty when omega = 0.
  std::optional<double> t_omega() const;
  // 2 pi / omega; empty when omega = 0.
  std::optional<double> gyro_period() const;

 private:
  double omega_ = 0.0;
};

struct PhasePoint {
  Vec3 x;
  Vec3 v;
};

struct FlowResult {
  Vec3 X;
  Vec3 V;
};

// Below this |omega * theta| the trigonometric quotients switch to Taylor
// series.
inline constexpr double kTaylorThreshold = 1e-4;
// Relative width (in units of the gyro-period) of the band around singular
// times rejected by operations that invert the rotation change of variables.
inline constexpr double kSingularGuard = 1e-8;

// sin(omega theta) / omega, equal to theta when omega = 0.
double sin_over_omega(double omega, double theta);
// (1 - cos(omega theta)) / omega, equal to 0 when omega = 0.
double one_minus_cos_over_omega(double omega, double theta);
// 2 sin(omega theta / 2) / omega; its square is 2 (1 - cos(omega theta)) / omega^2.
double half_chord(double omega, double theta);

// (X(s; t, x, v), V(s; t, x, v)) with E = 0.
FlowResult flow(double t, double s, const PhasePoint& p, const MagneticConfig& mag);

// X*(s, x, v) = X(t - s; t, x, phi^{-1}(v)); reduces to x - s v without field.
Vec3 xstar(double s, const Vec3& x, const Vec3& v, const MagneticConfig& mag);

// phi(v) = V(s; t, x, v): rotation about axis 3 by the angle omega (s - t).
Vec3 rotate_velocity(double s, double t, const Vec3& v, const MagneticConfig& mag);

// H_t(s, .) applied to a field vector e.
Vec3 kernel_h(double t, double s, const Vec3& e, const MagneticConfig& mag);

// D(t, s, .) applied to a field vector e. The first argument only selects the
// time at which e was sampled and does not enter the result.
Vec3 kernel_d(double t, double s, const Vec3& e, const MagneticConfig& mag);

// |det d X*(s, x, v) / dv| = 2 s (1 - cos omega s) / omega^2, s^3 without field.
double jacobian_psi_abs(double s, const MagneticConfig& mag);

// (sqrt 2 / s) (omega^2 s^2 / (2 (1 - cos omega s)))^{2/3}.
double singular_amplification(double s, const MagneticConfig& mag);

// zeta(s) = s (1 / (s (1 - cos omega s)))^{1/d}, the small-time integrand;
// s^{1 - 3/d} when omega = 0.
double zeta(double s, const MagneticConfig& mag, double d);

// zeta(s) (omega^2 / 2)^{1/d} = s^{1-3/d} (omega^2 s^2 / (2 (1 - cos omega s)))^{1/d}.
// Continuous in omega at 0, where it equals s^{1 - 3/d}.
double zeta_rescaled(double s, const MagneticConfig& mag, double d);

// True when s is within the guard band of a positive multiple of 2 pi / omega.
bool near_singular_time(double s, const MagneticConfig& mag);

}  // namespace mvp
