#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mvp/errors.hpp"
#include "mvp/harness.hpp"
#include "mvp/kinematics.hpp"

using namespace mvp;
using std::numbers::pi;

namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
}

}  // namespace

TEST(Flow, IdentityAtEqualTimes) {
  const MagneticConfig mag(3.0);
  const PhasePoint p{{{1.0, -2.0, 0.5}}, {{0.3, 0.1, -4.0}}};
  const FlowResult r = flow(1.7, 1.7, p, mag);
  EXPECT_EQ(r.X, p.x);
  EXPECT_EQ(r.V, p.v);
}

TEST(Flow, FreeStreamingWithoutField) {
  const FlowResult r = flow(1.0, 3.0, {{}, {{1.0, 2.0, 3.0}}}, MagneticConfig(0.0));
  expect_vec_near(r.X, {{2.0, 4.0, 6.0}}, 1e-15);
  expect_vec_near(r.V, {{1.0, 2.0, 3.0}}, 0.0);
}

TEST(Flow, QuarterTurn) {
  const FlowResult r = flow(0.0, pi / 2, {{}, {{1.0, 0.0, 0.0}}}, MagneticConfig(1.0));
  expect_vec_near(r.V, {{0.0, -1.0, 0.0}}, 1e-15);
  expect_vec_near(r.X, {{1.0, -1.0, 0.0}}, 1e-15);
}

TEST(Flow, FullPeriodReturnsVelocity) {
  const MagneticConfig mag(2.0);
  const PhasePoint p{{{0.5, 0.5, 0.5}}, {{1.0, -3.0, 0.25}}};
  const FlowResult r = flow(0.0, pi, p, mag);
  expect_vec_near(r.V, p.v, 1e-14);
  expect_vec_near(r.X, p.x + Vec3{{0.0, 0.0, pi * 0.25}}, 1e-14);
}

TEST(Flow, TaylorBranchIsContinuous) {
  // Just below and above the switch the two evaluations must agree.
  const double w = 1.0;
  for (double theta : {0.999e-4, 1.001e-4, 1e-7}) {
    const double exact = std::sin(w * theta) / w;
    EXPECT_NEAR(sin_over_omega(w, theta), exact, 1e-16 * exact);
    const double half = std::sin(0.5 * theta);
    EXPECT_NEAR(one_minus_cos_over_omega(w, theta), 2.0 * half * half, 1e-15 * 2.0 * half * half);
  }
  EXPECT_EQ(sin_over_omega(0.0, 2.5), 2.5);
  EXPECT_EQ(one_minus_cos_over_omega(0.0, 2.5), 0.0);
}

TEST(Xstar, Examples) {
  const Vec3 x{{0.3, 0.2, 0.1}};
  expect_vec_near(xstar(0.0, x, {{5.0, 6.0, 7.0}}, MagneticConfig(1.3)), x, 0.0);
  expect_vec_near(xstar(3.0, {}, {{1.0, 1.0, 1.0}}, MagneticConfig(0.0)), {{-3.0, -3.0, -3.0}}, 1e-15);
  expect_vec_near(xstar(pi, {}, {{1.0, 0.0, 0.0}}, MagneticConfig(1.0)), {{0.0, 2.0, 0.0}}, 1e-15);
}

TEST(RotateVelocity, Examples) {
  const MagneticConfig mag(1.0);
  expect_vec_near(rotate_velocity(2.0, 2.0, {{1.0, 2.0, 3.0}}, mag), {{1.0, 2.0, 3.0}}, 0.0);
  expect_vec_near(rotate_velocity(pi, 0.0, {{1.0, 0.0, 5.0}}, mag), {{-1.0, 0.0, 5.0}}, 1e-15);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Vec3 v{{n(rng), n(rng), n(rng)}};
    EXPECT_NEAR(norm(rotate_velocity(n(rng), n(rng), v, MagneticConfig(7.0))), norm(v), 4e-16 * norm(v) * 4);
  }
}

TEST(KernelH, Examples) {
  const Vec3 e{{0.7, -1.1, 2.0}};
  expect_vec_near(kernel_h(1.3, 1.3, e, MagneticConfig(2.0)), {}, 0.0);
  expect_vec_near(kernel_h(2.0, 0.0, e, MagneticConfig(0.0)), -2.0 * e, 1e-15);
  expect_vec_near(kernel_h(2.0, 0.0, e, MagneticConfig(1e-9)), -2.0 * e, 1e-8);  // O(omega t^2)
  // omega (s - t) = pi
  expect_vec_near(kernel_h(0.0, pi, e, MagneticConfig(1.0)), {{-2.0 * e[1], 2.0 * e[0], pi * e[2]}}, 1e-14);
}

TEST(KernelD, Examples) {
  const Vec3 e{{0.7, -1.1, 2.0}};
  expect_vec_near(kernel_d(1.0, 0.0, e, MagneticConfig(2.0)), {}, 0.0);
  expect_vec_near(kernel_d(1.0, 1.5, e, MagneticConfig(0.0)), -1.5 * e, 1e-15);
  expect_vec_near(kernel_d(1.0, pi, {{1.0, 0.0, 0.0}}, MagneticConfig(1.0)), {{0.0, 2.0, 0.0}}, 1e-15);
}

TEST(Jacobian, Examples) {
  EXPECT_NEAR(jacobian_psi_abs(pi / 2, MagneticConfig(2.0)), pi / 2, 1e-15);
  EXPECT_DOUBLE_EQ(jacobian_psi_abs(1.7, MagneticConfig(0.0)), 1.7 * 1.7 * 1.7);
  EXPECT_NEAR(jacobian_psi_abs(1.7, MagneticConfig(1e-7)), 1.7 * 1.7 * 1.7, 1e-12);
  EXPECT_LT(jacobian_psi_abs(2.0 * pi, MagneticConfig(1.0)), 1e-28);
  EXPECT_THROW(jacobian_psi_abs(0.0, MagneticConfig(1.0)), std::invalid_argument);
}

// Independent oracle: central-difference 3x3 determinant of v -> X*(s, x, v).
TEST(Jacobian, MatchesFiniteDifferenceDeterminant) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 5.5);
  for (int trial = 0; trial < 20; ++trial) {
    const MagneticConfig mag(trial % 4 == 0 ? 0.0 : 0.5 + 0.1 * trial);
    const double s = u(rng);
    if (mag.magnetized() && std::abs(std::remainder(mag.omega() * s, 2.0 * pi)) < 0.2) continue;
    const Vec3 x{{u(rng), -u(rng), u(rng)}}, v{{u(rng), u(rng), -u(rng)}};
    Eigen::Matrix3d jac;
    const double h = 1e-5;
    for (int j = 0; j < 3; ++j) {
      Vec3 vp = v, vm = v;
      vp[j] += h;
      vm[j] -= h;
      const Vec3 d = (1.0 / (2.0 * h)) * (xstar(s, x, vp, mag) - xstar(s, x, vm, mag));
      for (int i = 0; i < 3; ++i) jac(i, j) = d[i];
    }
    const double expected = jacobian_psi_abs(s, mag);
    EXPECT_NEAR(std::abs(jac.determinant()), expected, 1e-7 * std::max(1.0, expected)) << "s = " << s;
  }
}

TEST(SingularAmplification, Examples) {
  EXPECT_DOUBLE_EQ(singular_amplification(2.0, MagneticConfig(0.0)), std::numbers::sqrt2 / 2.0);
  const double at_pi = singular_amplification(pi, MagneticConfig(1.0));
  EXPECT_NEAR(at_pi, std::pow(pi * pi / 4.0, 2.0 / 3.0) * std::numbers::sqrt2 / pi, 1e-14);
  const double near = singular_amplification(2.0 * pi - 1e-6, MagneticConfig(1.0));
  EXPECT_TRUE(std::isfinite(near));
  EXPECT_GE(near, 1e6 * at_pi);
  EXPECT_THROW(singular_amplification(2.0 * pi, MagneticConfig(1.0)), SingularTimeError);
  EXPECT_THROW(singular_amplification(-1.0, MagneticConfig(1.0)), std::invalid_argument);
}

TEST(Zeta, Examples) {
  EXPECT_DOUBLE_EQ(zeta(8.0, MagneticConfig(0.0), 3.0), 1.0);
  EXPECT_NEAR(zeta(pi, MagneticConfig(1.0), 3.0), pi * std::cbrt(1.0 / (2.0 * pi)), 1e-14);
  EXPECT_THROW(zeta(1.0, MagneticConfig(1.0), 1.5), std::invalid_argument);
  EXPECT_THROW(zeta(1.0, MagneticConfig(1.0), 4.0), std::invalid_argument);
  EXPECT_THROW(zeta(4.0 * pi, MagneticConfig(1.0), 3.0), SingularTimeError);
}

TEST(Zeta, SmallTimeAsymptotics) {
  const double w = 2.0, d = 3.5;
  for (double s : {1e-3, 1e-5}) {
    const double lead = std::pow(s, 1.0 - 3.0 / d) * std::pow(2.0 / (w * w), 1.0 / d);
    EXPECT_NEAR(zeta(s, MagneticConfig(w), d) / lead, 1.0, 1e-5);
  }
}

TEST(Zeta, RescaledFormIsOmegaInvariant) {
  const double d = 3.0, u = 2.1;
  const double ref = zeta_rescaled(u, MagneticConfig(1.0), d) / std::pow(u, 1.0 - 3.0 / d);
  for (double w : {0.5, 2.0, 10.0}) {
    const double s = u / w;
    EXPECT_NEAR(zeta_rescaled(s, MagneticConfig(w), d) / std::pow(s, 1.0 - 3.0 / d), ref, 1e-13);
    EXPECT_NEAR(zeta_rescaled(s, MagneticConfig(w), d),
                zeta(s, MagneticConfig(w), d) * std::pow(w * w / 2.0, 1.0 / d), 1e-12);
  }
  EXPECT_NEAR(zeta_rescaled(0.8, MagneticConfig(1e-9), d), zeta(0.8, MagneticConfig(0.0), d), 1e-12);
}

TEST(NearSingularTime, Band) {
  const MagneticConfig mag(1.0);
  EXPECT_TRUE(near_singular_time(2.0 * pi, mag));
  EXPECT_TRUE(near_singular_time(4.0 * pi * (1.0 + 1e-12), mag));
  EXPECT_FALSE(near_singular_time(2.0 * pi * (1.0 + 1e-6), mag));
  EXPECT_FALSE(near_singular_time(pi, mag));
  EXPECT_FALSE(near_singular_time(2.0 * pi, MagneticConfig(0.0)));
}

TEST(MagneticConfig, Validation) {
  EXPECT_THROW(MagneticConfig(-1.0), std::invalid_argument);
  EXPECT_THROW(MagneticConfig(std::nan("")), std::invalid_argument);
  EXPECT_FALSE(MagneticConfig(0.0).t_omega().has_value());
  EXPECT_DOUBLE_EQ(*MagneticConfig(2.0).t_omega(), pi / 2);
  EXPECT_DOUBLE_EQ(*MagneticConfig(2.0).gyro_period(), pi);
}

// The harness checks themselves, at reduced sample counts.
TEST(KinematicsChecks, AllPass) {
  harness::KinematicsOptions opt;
  opt.samples = 200;
  for (const auto& r : harness::verify_kinematics(opt)) EXPECT_TRUE(r.pass) << harness::format_report(r);
}
