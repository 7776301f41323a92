#include "mvp/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mvp/errors.hpp"

namespace mvp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_exponent(double d) {
  if (!(d > 1.5 && d <= 3.75)) {
    throw std::invalid_argument("exponent d must lie in (3/2, 15/4], got " + std::to_string(d));
  }
}

void require_regular(double s, const MagneticConfig& mag, const char* op) {
  if (!(s > 0.0)) {
    throw std::invalid_argument(std::string(op) + ": duration must be positive");
  }
  if (near_singular_time(s, mag)) {
    throw SingularTimeError(std::string(op) + ": s = " + std::to_string(s) +
                            " is a multiple of the cyclotron period");
  }
}

}  // namespace

MagneticConfig::MagneticConfig(double omega) : omega_(omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) {
    throw std::invalid_argument("cyclotron frequency must be finite and >= 0");
  }
}

std::optional<double> MagneticConfig::t_omega() const {
  if (!magnetized()) return std::nullopt;
  return std::numbers::pi / omega_;
}

std::optional<double> MagneticConfig::gyro_period() const {
  if (!magnetized()) return std::nullopt;
  return kTwoPi / omega_;
}

double sin_over_omega(double omega, double theta) {
  const double a = omega * theta;
  if (std::abs(a) < kTaylorThreshold) {
    const double a2 = a * a;
    return theta * (1.0 - a2 / 6.0 * (1.0 - a2 / 20.0 * (1.0 - a2 / 42.0)));
  }
  return std::sin(a) / omega;
}

double one_minus_cos_over_omega(double omega, double theta) {
  const double a = omega * theta;
  if (std::abs(a) < kTaylorThreshold) {
    const double a2 = a * a;
    return theta * a * (0.5 - a2 / 24.0 * (1.0 - a2 / 30.0 * (1.0 - a2 / 56.0)));
  }
  const double h = std::sin(0.5 * a);
  return 2.0 * h * h / omega;
}

double half_chord(double omega, double theta) {
  // 2 sin(a/2) / omega = theta * sinc(a/2)
  const double b = 0.5 * omega * theta;
  if (std::abs(b) < kTaylorThreshold) {
    const double b2 = b * b;
    return theta * (1.0 - b2 / 6.0 * (1.0 - b2 / 20.0 * (1.0 - b2 / 42.0)));
  }
  return 2.0 * std::sin(b) / omega;
}

bool near_singular_time(double s, const MagneticConfig& mag) {
  if (!mag.magnetized() || !(s > 0.0)) return false;
  const double period = kTwoPi / mag.omega();
  const double k = std::round(s / period);
  if (k < 1.0) return false;
  return std::abs(s - k * period) < kSingularGuard * period;
}

FlowResult flow(double t, double s, const PhasePoint& p, const MagneticConfig& mag) {
  const double w = mag.omega();
  const double theta = s - t;
  const double a = w * theta;
  const double c = std::cos(a);
  const double sn = std::sin(a);
  const double so = sin_over_omega(w, theta);
  const double co = one_minus_cos_over_omega(w, theta);
  const Vec3& x = p.x;
  const Vec3& v = p.v;
  FlowResult r;
  r.V = {v[0] * c + v[1] * sn, -v[0] * sn + v[1] * c, v[2]};
  r.X = {x[0] + v[0] * so + v[1] * co, x[1] - v[0] * co + v[1] * so, x[2] + v[2] * theta};
  return r;
}

Vec3 xstar(double s, const Vec3& x, const Vec3& v, const MagneticConfig& mag) {
  const double w = mag.omega();
  const double so = sin_over_omega(w, s);
  const double co = one_minus_cos_over_omega(w, s);
  return {x[0] - v[0] * so - v[1] * co, x[1] + v[0] * co - v[1] * so, x[2] - v[2] * s};
}

Vec3 rotate_velocity(double s, double t, const Vec3& v, const MagneticConfig& mag) {
  const double a = mag.omega() * (s - t);
  const double c = std::cos(a);
  const double sn = std::sin(a);
  return {v[0] * c + v[1] * sn, -v[0] * sn + v[1] * c, v[2]};
}

Vec3 kernel_h(double t, double s, const Vec3& e, const MagneticConfig& mag) {
  const double w = mag.omega();
  const double theta = s - t;
  const double so = sin_over_omega(w, theta);
  const double co = one_minus_cos_over_omega(w, theta);
  return {so * e[0] - co * e[1], co * e[0] + so * e[1], theta * e[2]};
}

Vec3 kernel_d(double /*t*/, double s, const Vec3& e, const MagneticConfig& mag) {
  const double w = mag.omega();
  const double so = sin_over_omega(w, s);
  const double co = one_minus_cos_over_omega(w, s);
  return {-so * e[0] - co * e[1], co * e[0] - so * e[1], -s * e[2]};
}

double jacobian_psi_abs(double s, const MagneticConfig& mag) {
  if (!(s > 0.0)) throw std::invalid_argument("jacobian_psi_abs: duration must be positive");
  const double hc = half_chord(mag.omega(), s);
  return s * hc * hc;
}

double singular_amplification(double s, const MagneticConfig& mag) {
  require_regular(s, mag, "singular_amplification");
  const double hc = std::abs(half_chord(mag.omega(), s));
  if (hc == 0.0) throw SingularTimeError("singular_amplification: 1 - cos(omega s) underflows");
  // omega^2 s^2 / (2 (1 - cos omega s)) = (s / hc)^2
  return std::numbers::sqrt2 / s * std::pow(s / hc, 4.0 / 3.0);
}

double zeta(double s, const MagneticConfig& mag, double d) {
  require_exponent(d);
  require_regular(s, mag, "zeta");
  if (!mag.magnetized()) return std::pow(s, 1.0 - 3.0 / d);
  const double w = mag.omega();
  const double hc = half_chord(w, s);
  const double one_minus_cos = 0.5 * w * w * hc * hc;
  if (one_minus_cos == 0.0) throw SingularTimeError("zeta: 1 - cos(omega s) underflows");
  return s * std::pow(1.0 / (s * one_minus_cos), 1.0 / d);
}

double zeta_rescaled(double s, const MagneticConfig& mag, double d) {
  require_exponent(d);
  require_regular(s, mag, "zeta_rescaled");
  const double hc = std::abs(half_chord(mag.omega(), s));
  if (hc == 0.0) throw SingularTimeError("zeta_rescaled: 1 - cos(omega s) underflows");
  return std::pow(s, 1.0 - 3.0 / d) * std::pow(s / hc, 2.0 / d);
}

}  // namespace mvp
