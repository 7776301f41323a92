#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "mvp/errors.hpp"
#include "mvp/harness.hpp"

using namespace mvp;
using namespace mvp::harness;
using std::numbers::pi;

namespace {

double gauss3(double r2, double var) { return std::exp(-0.5 * r2 / var) / std::pow(2.0 * pi * var, 1.5); }

}  // namespace

TEST(Report, FinalizeAndFormat) {
  EstimateReport r;
  r.name = "demo";
  r.max_ratio = 0.5;
  r.threshold = 1.0;
  r.fitted["C"] = 2.0;
  EXPECT_TRUE(r.finalize());
  const std::string s = format_report(r);
  EXPECT_NE(s.find("demo.max_ratio=0.5"), std::string::npos);
  EXPECT_NE(s.find("demo.fitted.C=2"), std::string::npos);
  EXPECT_NE(s.find("demo.pass=true"), std::string::npos);
  r.max_ratio = std::nan("");
  EXPECT_FALSE(r.finalize());
  r.max_ratio = 1.5;
  EXPECT_FALSE(r.finalize());
  EXPECT_FALSE(all_pass({r}));
}

// -------------------------------------------------------------- time split

TEST(SelectT0, Examples) {
  const double k = 4.0, d = 3.0;
  EXPECT_DOUBLE_EQ(derived_l(k, d), 11.0);
  const double l = derived_l(k, d);
  const double mu = std::exp((k + 3) * (k + 3) * (2.0 - 3.0 / d) / (3.0 * (l + 3))) - 1.0;
  EXPECT_NEAR(select_t0(1.0, mu, k, d), 1.0 / std::numbers::e, 1e-14);
  EXPECT_LT(select_t0_residual(1.0, mu, k, d), 1e-12);
  EXPECT_DOUBLE_EQ(select_t0(2.0, 0.0, k, d), 2.0);
  EXPECT_THROW(select_t0(1.0, 1.0, k, 1.5), std::invalid_argument);
}

TEST(SmallTime, IntegralMatchesIndependentQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  for (double w : {0.0, 0.7, 2.0}) {
    const MagneticConfig mag(w);
    const double d = 3.0, t0 = w > 0 ? 2.5 / w : 2.5;
    // the integrand behaves like s^{1-3/d}, which is integrable and here
    // equal to s^0
    const double ref = gauss_kronrod<double, 61>::integrate(
        [&](double s) { return zeta_rescaled(s, mag, d); }, 0.0, t0, 12, 1e-13);
    EXPECT_NEAR(small_time_integral(mag, d, t0), ref, 1e-9 * ref) << "omega = " << w;
  }
}

TEST(SmallTime, RatioIsOmegaInvariant) {
  const std::vector<double> u0{1e-3, 0.01, 0.1, 1.0, 2.0, pi};
  std::vector<double> ratios;
  for (double w : {0.5, 1.0, 2.0}) {
    std::vector<double> t0;
    for (double u : u0) t0.push_back(u / w);
    const EstimateReport r = verify_small_time_bound(MagneticConfig(w), 3.5, t0);
    EXPECT_TRUE(r.pass) << format_report(r);
    ratios.push_back(r.max_ratio);
  }
  EXPECT_NEAR(ratios[0], ratios[1], 1e-9 * ratios[1]);
  EXPECT_NEAR(ratios[2], ratios[1], 1e-9 * ratios[1]);
  EXPECT_THROW(verify_small_time_bound(MagneticConfig(1.0), 3.0, {4.0}), std::invalid_argument);
}

TEST(LargeTime, BoundedRatio) {
  const MagneticConfig mag(1.0);
  const EstimateReport r = verify_large_time_log(mag, {0.01, 0.03, 0.1}, pi);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_ratio, 2.0 * std::cbrt(4.0));
  const EstimateReport same = verify_large_time_log(mag, {pi}, pi);
  EXPECT_TRUE(same.pass);
  EXPECT_EQ(same.samples, 0u);
  EXPECT_THROW(verify_large_time_log(mag, {4.0}, pi), std::invalid_argument);
}

// ------------------------------------------------------------------ Gronwall

TEST(Gronwall, RecoversExactEnvelope) {
  // Samples on the envelope member C = c (anchored at y(0) = y0) after t = 0.
  const double c = 0.3, T = pi, y0 = 5.0;
  std::vector<std::pair<double, double>> member;
  for (int i = 0; i <= 60; ++i) {
    const double t = T * i / 60.0;
    const double ln = i == 0 ? std::log(y0) : c * T * std::exp(c * t) + std::exp(c * t) * std::log(y0);
    member.emplace_back(t, std::exp(ln));
  }
  const auto fits = fit_gronwall_envelope(member, T);
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_TRUE(fits[0].finite);
  EXPECT_NEAR(fits[0].C, c, 1e-3);
  EXPECT_LE(fits[0].C, c + 1e-6);
}

TEST(Gronwall, ConstantSeriesNeedsNoGrowth) {
  std::vector<std::pair<double, double>> y;
  for (int i = 0; i <= 20; ++i) y.emplace_back(0.1 * i, 3.0);
  const auto fits = fit_gronwall_envelope(y, 1.0);
  ASSERT_EQ(fits.size(), 2u);
  for (const auto& f : fits) EXPECT_NEAR(f.C, 0.0, 1e-9);
  EXPECT_TRUE(gronwall_report(fits, 4.0).pass);
}

TEST(Gronwall, UnboundedGrowthHitsCap) {
  std::vector<std::pair<double, double>> y{{0.0, 2.0}, {0.5, 1e300}, {1.0, kInf}};
  const auto fits = fit_gronwall_envelope(y, 1.0, 10.0);
  EXPECT_FALSE(fits[0].finite);
  EXPECT_FALSE(gronwall_report(fits, 4.0, 10.0).pass);
}

// ----------------------------------------------------------------- stability

TEST(StabilityEnvelope, SyntheticDecayRate) {
  const double c = 0.05, q0 = 1e-12;
  const double L0 = 1.0 + std::log(1.0 / q0);
  std::vector<std::pair<double, double>> q;
  for (int i = 0; i <= 30; ++i) {
    const double t = 0.1 * i;
    q.emplace_back(t, std::exp(1.0 - L0 * std::exp(-c * t)));
  }
  const EstimateReport r = verify_stability_envelope(q);
  EXPECT_NEAR(r.fitted.at("C"), c, 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(StabilityEnvelope, IdenticalRunsAreTrivial) {
  const EstimateReport r = verify_stability_envelope({{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.fitted.at("C"), 0.0);
  EXPECT_FALSE(verify_stability_envelope({{0.0, 1e-12}, {1.0, 0.5}}).pass);
}

// --------------------------------------------------------------------- decay

TEST(Decay, MaxwellianProfileIsTightBound) {
  DistributionSpec spec;
  spec.temperature = 0.3;
  const DecayProfile h = decay_profile_for(spec);
  double best = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double r = 0.002 * i;
    const double f = spec.density(spec.center, {{r, 0.0, 0.0}});
    EXPECT_LE(f, h(r) * (1.0 + 1e-12));
    best = std::max(best, f / h(r));
  }
  EXPECT_GT(best, 0.999);
}

TEST(Decay, BumpProfileBoundsDensityAndTwoStreamIsRejected) {
  DistributionSpec spec;
  spec.family = "compact-bump";
  const DecayProfile h = decay_profile_for(spec);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 v{{u(rng), u(rng), u(rng)}};
    EXPECT_LE(spec.density({{0.1, 0.0, 0.0}}, v), h(norm(v)) * (1.0 + 1e-12));
  }
  spec.family = "two-stream";
  EXPECT_THROW(decay_profile_for(spec), std::invalid_argument);
}

TEST(Decay, CheckerOnInitialState) {
  DistributionSpec spec;
  const ParticleEnsemble ens = sample_initial(spec, 2000, 4);
  DecayChecker checker(decay_profile_for(spec));
  const GridSpec g{{{-10.0, -10.0, -10.0}}, {{20.0, 20.0, 20.0}}, {4, 4, 4}};
  checker.observe(0.0, ens, VectorField(g));
  const EstimateReport r = checker.report();
  EXPECT_TRUE(r.pass) << format_report(r);
  EXPECT_EQ(r.max_ratio, 0.0);
}

TEST(BoundedDensity, InitialTimeGivesInitialDensity) {
  DistributionSpec spec;
  const Vec3 x{{0.4, -0.3, 0.2}};
  const double rho0 = spec.mass * gauss3(norm2(x), spec.sigma_x * spec.sigma_x);
  EXPECT_NEAR(envelope_integral(spec, MagneticConfig(1.0), 0.5, 0.0, x), rho0, 1e-6 * rho0);
}

TEST(BoundedDensity, UnmagnetizedMatchesRadialQuadrature) {
  using boost::math::quadrature::gauss_kronrod;
  DistributionSpec spec;
  const double R = 0.2, t = 0.8;
  const auto g = [&](double r) {
    const double dz = std::max(0.0, t * r - R * t * t), dv = std::max(0.0, r - R * t);
    return 4.0 * pi * r * r * spec.mass * gauss3(dz * dz, 1.0) * gauss3(dv * dv, spec.temperature);
  };
  const double kink = R * t;
  const double ref = gauss_kronrod<double, 61>::integrate(g, 0.0, kink, 10, 1e-13) +
                     gauss_kronrod<double, 61>::integrate(g, kink, 5.0, 15, 1e-13);
  EXPECT_NEAR(envelope_integral(spec, MagneticConfig(0.0), R, t, spec.center), ref, 1e-5 * ref);
}

TEST(BoundedDensity, BumpIntegralBoundedBySupTimesVolume) {
  DistributionSpec spec;
  spec.family = "compact-bump";
  const double R = 0.3, t = 0.5;
  const double reach = spec.bump_radius_v + R * t;
  const double bound = spec.sup() * 4.0 / 3.0 * pi * reach * reach * reach;
  const double v = envelope_integral(spec, MagneticConfig(0.0), R, t, {{0.5, 0.0, 0.0}});
  EXPECT_LE(v, bound);
  EXPECT_GT(v, 0.0);
}

TEST(BoundedDensity, DivergesOnceOmegaTExpOmegaTReachesOne) {
  DistributionSpec spec;
  spec.family = "compact-bump";
  const MagneticConfig mag(1.0);
  // omega t e^{omega t} = 1 at t = W(1) = 0.567...
  EXPECT_TRUE(std::isfinite(envelope_integral(spec, mag, 0.1, 0.5, spec.center)));
  EXPECT_TRUE(std::isinf(envelope_integral(spec, mag, 0.1, 0.6, spec.center)));
  const EstimateReport r =
      verify_bounded_density_condition(spec, mag, 0.1, {0.0, 0.3, 0.6}, {spec.center}, {{0.0, 0.01}});
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.fitted.at("first_divergent_t"), 0.6);
  const EstimateReport ok =
      verify_bounded_density_condition(spec, mag, 0.1, {0.0, 0.3}, {spec.center}, {{0.0, 0.0}});
  EXPECT_TRUE(ok.pass);
}

// ------------------------------------------------------------ representation

namespace {

std::vector<RepresentationFrame> free_history(const ParticleEnsemble& e, const MagneticConfig& mag, double t,
                                              std::size_t nq) {
  std::vector<RepresentationFrame> h;
  for (std::size_t j = 0; j <= nq; ++j) {
    RepresentationFrame f;
    f.t = t * static_cast<double>(j) / static_cast<double>(nq);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const FlowResult r = flow(0.0, f.t, {e.positions[i], e.velocities[i]}, mag);
      f.positions.push_back(r.X);
      f.velocities.push_back(r.V);
      f.fields.push_back({});
    }
    h.push_back(std::move(f));
  }
  return h;
}

const GridSpec kEval{{{-8.0, -8.0, -8.0}}, {{16.0, 16.0, 16.0}}, {16, 16, 16}};

}  // namespace

TEST(Representation, ExactAtInitialTime) {
  const ParticleEnsemble e = sample_initial(DistributionSpec{}, 3000, 2);
  const auto h = free_history(e, MagneticConfig(1.0), 0.0, 1);
  const RepresentationResult r = representation_mismatch({h.front()}, e.weights, kEval, MagneticConfig(1.0));
  EXPECT_EQ(r.mismatch, 0.0);
  EXPECT_EQ(r.integral_term, 0.0);
}

TEST(Representation, ZeroFieldIsFreeTransport) {
  const MagneticConfig mag(1.0);
  const ParticleEnsemble e = sample_initial(DistributionSpec{}, 3000, 2);
  const RepresentationResult r = representation_mismatch(free_history(e, mag, 1.0, 8), e.weights, kEval, mag);
  EXPECT_EQ(r.integral_term, 0.0);
  EXPECT_LT(r.mismatch, 1e-12);
  EXPECT_NEAR(r.transport_only, r.mismatch, 1e-12);
}

TEST(Representation, RejectsSingularTimesAndBadHistories) {
  const MagneticConfig mag(1.0);
  const ParticleEnsemble e = sample_initial(DistributionSpec{}, 100, 2);
  EXPECT_THROW(representation_mismatch(free_history(e, mag, 2.0 * pi, 4), e.weights, kEval, mag), SingularTimeError);
  EXPECT_THROW(representation_mismatch({}, e.weights, kEval, mag), std::invalid_argument);
  auto h = free_history(e, mag, 1.0, 4);
  h[2].t += 0.01;
  EXPECT_THROW(representation_mismatch(h, e.weights, kEval, mag), std::invalid_argument);
}

TEST(Representation, SplineDepositConservesMass) {
  const ParticleEnsemble e = sample_initial(DistributionSpec{}, 500, 8);
  EXPECT_NEAR(deposit_spline(kEval, e.positions, e.weights).integral(), 1.0, 1e-12);
}

TEST(Representation, FrozenFieldMismatchShrinksUnderRefinement) {
  FrozenFieldProblem prob;
  prob.particles = 4000;
  std::vector<double> w;
  const auto history = frozen_field_history(prob, 32, &w);
  const MagneticConfig mag(prob.omega);
  const RepresentationResult coarse = representation_mismatch(subsample(history, 4), w, kEval, mag);
  const RepresentationResult fine = representation_mismatch(history, w, kEval, mag);
  EXPECT_GT(coarse.mismatch / fine.mismatch, 3.0);
  EXPECT_LT(fine.mismatch, 0.1);
  EXPECT_GT(fine.integral_term, 10.0 * fine.mismatch);
}
