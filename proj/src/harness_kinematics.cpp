#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "mvp/harness.hpp"

namespace mvp::harness {

namespace {

using State = std::array<double, 6>;

double norm6(const Vec3& a, const Vec3& b) { return std::sqrt(norm2(a) + norm2(b)); }

struct Sampler {
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vec3 vec(double r) { return {uniform(-r, r), uniform(-r, r), uniform(-r, r)}; }
  std::mt19937_64 rng;
};

EstimateReport make(const std::string& name, double threshold) {
  EstimateReport r;
  r.name = name;
  r.threshold = threshold;
  return r;
}

Eigen::Matrix<double, 6, 6> flow_jacobian_fd(double t, double s, const PhasePoint& p, const MagneticConfig& mag,
                                            double delta) {
  Eigen::Matrix<double, 6, 6> j;
  for (int c = 0; c < 6; ++c) {
    PhasePoint plus = p, minus = p;
    (c < 3 ? plus.x[c] : plus.v[c - 3]) += delta;
    (c < 3 ? minus.x[c] : minus.v[c - 3]) -= delta;
    const FlowResult a = flow(t, s, plus, mag), b = flow(t, s, minus, mag);
    for (int r = 0; r < 6; ++r) {
      const double fa = r < 3 ? a.X[r] : a.V[r - 3];
      const double fb = r < 3 ? b.X[r] : b.V[r - 3];
      j(r, c) = (fa - fb) / (2.0 * delta);
    }
  }
  return j;
}

double xstar_det_fd(double s, const Vec3& x, const Vec3& v, const MagneticConfig& mag, double delta) {
  Eigen::Matrix3d j;
  for (int c = 0; c < 3; ++c) {
    Vec3 plus = v, minus = v;
    plus[c] += delta;
    minus[c] -= delta;
    const Vec3 a = xstar(s, x, plus, mag), b = xstar(s, x, minus, mag);
    for (int r = 0; r < 3; ++r) j(r, c) = (a[r] - b[r]) / (2.0 * delta);
  }
  return std::abs(j.determinant());
}

}  // namespace

EstimateReport check_flow_vs_ode(const KinematicsOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  auto rep = make("kinematics.flow_vs_ode", 1e-9);
  Sampler rnd(opt.seed);
  for (double w : opt.omegas) {
    const double period = 2.0 * std::numbers::pi / w;
    auto rhs = [w](const State& y, State& dy, double) {
      dy[0] = y[3];
      dy[1] = y[4];
      dy[2] = y[5];
      dy[3] = w * y[4];
      dy[4] = -w * y[3];
      dy[5] = 0.0;
    };
    const MagneticConfig mag(w);
    for (std::size_t i = 0; i < opt.samples; ++i) {
      const PhasePoint p{rnd.vec(1.0), rnd.vec(1.0)};
      const double t = rnd.uniform(-5.0, 5.0);
      State y{p.x[0], p.x[1], p.x[2], p.v[0], p.v[1], p.v[2]};
      auto stepper = odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_dopri5<State>());
      odeint::integrate_adaptive(stepper, rhs, y, t, t + period, period / 200.0);
      const FlowResult f = flow(t, t + period, p, mag);
      const Vec3 X{y[0], y[1], y[2]}, V{y[3], y[4], y[5]};
      const double err = norm6(f.X - X, f.V - V) / norm6(X, V);
      rep.max_ratio = std::max(rep.max_ratio, err);
      ++rep.samples;
    }
  }
  rep.finalize();
  return rep;
}

EstimateReport check_group_law(const KinematicsOptions& opt) {
  auto rep = make("kinematics.group_law", 1e-12);
  Sampler rnd(opt.seed + 1);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const MagneticConfig mag(i % 10 == 0 ? 0.0 : rnd.uniform(0.0, 5.0));
    const PhasePoint p{rnd.vec(1.0), rnd.vec(1.0)};
    const double t = rnd.uniform(-5.0, 5.0), s1 = rnd.uniform(-5.0, 5.0), s2 = rnd.uniform(-5.0, 5.0);
    const FlowResult mid = flow(t, s1, p, mag);
    const FlowResult two = flow(s1, s2, PhasePoint{mid.X, mid.V}, mag);
    const FlowResult one = flow(t, s2, p, mag);
    const double scale = norm6(one.X, one.V) + norm6(mid.X, mid.V);
    rep.max_ratio = std::max(rep.max_ratio, norm6(two.X - one.X, two.V - one.V) / scale);
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_volume_preservation(const KinematicsOptions& opt) {
  auto rep = make("kinematics.volume_preservation", 1e-8);
  Sampler rnd(opt.seed + 2);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const MagneticConfig mag(rnd.uniform(0.0, 5.0));
    const PhasePoint p{rnd.vec(1.0), rnd.vec(1.0)};
    const double t = rnd.uniform(-5.0, 5.0), s = rnd.uniform(-5.0, 5.0);
    const double det = flow_jacobian_fd(t, s, p, mag, 1e-3).determinant();
    rep.max_ratio = std::max(rep.max_ratio, std::abs(det - 1.0));
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_speed_invariance(const KinematicsOptions& opt) {
  auto rep = make("kinematics.speed_invariance", 1e-14);
  Sampler rnd(opt.seed + 3);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const MagneticConfig mag(rnd.uniform(0.0, 10.0));
    const PhasePoint p{rnd.vec(1.0), rnd.vec(1.0)};
    const FlowResult f = flow(rnd.uniform(-5.0, 5.0), rnd.uniform(-5.0, 5.0), p, mag);
    rep.max_ratio = std::max(rep.max_ratio, std::abs(norm(f.V) - norm(p.v)) / norm(p.v));
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_xstar_identity(const KinematicsOptions& opt) {
  auto rep = make("kinematics.xstar_identity", 1e-12);
  Sampler rnd(opt.seed + 4);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const MagneticConfig mag(i % 10 == 0 ? 0.0 : rnd.uniform(0.0, 5.0));
    const Vec3 x = rnd.vec(1.0), v = rnd.vec(1.0);
    const double t = rnd.uniform(0.0, 5.0), s = rnd.uniform(0.0, t);
    const Vec3 a = flow(t, s, PhasePoint{x, v}, mag).X;
    const Vec3 b = xstar(t - s, x, rotate_velocity(s, t, v, mag), mag);
    rep.max_ratio = std::max(rep.max_ratio, norm(a - b) / (norm(x) + norm(v) * (1.0 + t)));
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_hd_identity(const KinematicsOptions& opt) {
  auto rep = make("kinematics.hd_identity", 1e-14);
  rep.notes.emplace_back("times", "dyadic, so t - s and -s are formed exactly");
  Sampler rnd(opt.seed + 5);
  std::uniform_int_distribution<std::int64_t> ticks(0, std::int64_t{1} << 20);
  const double unit = std::ldexp(1.0, -16);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const MagneticConfig mag(i % 10 == 0 ? 0.0 : rnd.uniform(0.0, 5.0));
    const std::int64_t kt = ticks(rnd.rng);
    const std::int64_t ks = std::uniform_int_distribution<std::int64_t>(0, kt)(rnd.rng);
    const double t = static_cast<double>(kt) * unit, s = static_cast<double>(ks) * unit;
    const Vec3 e = rnd.vec(1.0);
    const Vec3 d = kernel_d(t - s, s, e, mag);
    const Vec3 h = kernel_h(t, t - s, e, mag);
    const double scale = std::max(norm(d), norm(e) * std::numeric_limits<double>::min());
    rep.max_ratio = std::max(rep.max_ratio, norm(d - h) / scale);
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_jacobian(const KinematicsOptions& opt, std::size_t samples) {
  auto rep = make("kinematics.jacobian", 1e-6);
  Sampler rnd(opt.seed + 6);
  for (std::size_t i = 0; i < samples; ++i) {
    const double w = opt.omegas[i % opt.omegas.size()];
    const MagneticConfig mag(w);
    const double s = rnd.uniform(0.01, 2.0 * std::numbers::pi - 0.01) / w;
    const Vec3 x = rnd.vec(1.0), v = rnd.vec(1.0);
    const double fd = xstar_det_fd(s, x, v, mag, 1.0);
    const double exact = jacobian_psi_abs(s, mag);
    rep.max_ratio = std::max(rep.max_ratio, std::abs(fd - exact) / exact);
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_omega_continuity(const KinematicsOptions& opt) {
  auto rep = make("kinematics.omega_continuity", 1e-6);
  rep.notes.emplace_back("zeta", "compared in the rescaled convention; the raw form carries (2/omega^2)^{1/d}");
  Sampler rnd(opt.seed + 7);
  const MagneticConfig zero(0.0), tiny(1e-8);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  auto relv = [](const Vec3& a, const Vec3& b, double scale) { return norm(a - b) / scale; };
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const PhasePoint p{rnd.vec(1.0), rnd.vec(1.0)};
    const Vec3 e = rnd.vec(1.0);
    const double t = rnd.uniform(0.0, 10.0), s = rnd.uniform(0.01, 10.0);
    const double scale = norm(p.x) + norm(p.v) * (1.0 + std::abs(s - t) + s);
    double worst = 0.0;
    const FlowResult f0 = flow(t, s, p, zero), f1 = flow(t, s, p, tiny);
    worst = std::max({worst, relv(f1.X, f0.X, scale), relv(f1.V, f0.V, norm(p.v))});
    worst = std::max(worst, relv(xstar(s, p.x, p.v, tiny), xstar(s, p.x, p.v, zero), scale));
    worst = std::max(worst, relv(rotate_velocity(s, t, p.v, tiny), rotate_velocity(s, t, p.v, zero), norm(p.v)));
    const double es = norm(e) * (1.0 + std::abs(s - t) + s);
    worst = std::max(worst, relv(kernel_h(t, s, e, tiny), kernel_h(t, s, e, zero), es));
    worst = std::max(worst, relv(kernel_d(t, s, e, tiny), kernel_d(t, s, e, zero), es));
    worst = std::max(worst, rel(jacobian_psi_abs(s, tiny), jacobian_psi_abs(s, zero)));
    worst = std::max(worst, rel(singular_amplification(s, tiny), singular_amplification(s, zero)));
    worst = std::max(worst, rel(zeta_rescaled(s, tiny, 3.0), zeta_rescaled(s, zero, 3.0)));
    rep.max_ratio = std::max(rep.max_ratio, worst);
    ++rep.samples;
  }
  rep.finalize();
  return rep;
}

EstimateReport check_zeta_factor_bounded(const std::vector<double>& ds) {
  auto rep = make("kinematics.zeta_factor_bounded", 1.0 + 1e-12);
  rep.notes.emplace_back("measure", "sup over (0, pi] divided by the value at pi");
  const int n = 20000;
  for (double d : ds) {
    auto phi = [d](double s) {
      const double hc = half_chord(1.0, s);
      return std::pow(2.0 * s * s / (hc * hc), 1.0 / d);
    };
    double sup = 0.0, arg = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double s = std::numbers::pi * i / n;
      if (phi(s) > sup) {
        sup = phi(s);
        arg = s;
      }
      ++rep.samples;
    }
    rep.max_ratio = std::max(rep.max_ratio, sup / phi(std::numbers::pi));
    rep.fitted["sup_d" + exponent_label(d)] = sup;
    rep.fitted["argmax_d" + exponent_label(d)] = arg;
  }
  rep.finalize();
  return rep;
}

std::vector<EstimateReport> verify_kinematics(const KinematicsOptions& opt) {
  return {check_flow_vs_ode(opt),      check_group_law(opt),    check_volume_preservation(opt),
          check_speed_invariance(opt), check_xstar_identity(opt), check_hd_identity(opt),
          check_jacobian(opt),         check_omega_continuity(opt), check_zeta_factor_bounded()};
}

}  // namespace mvp::harness
