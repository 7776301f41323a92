#include <gtest/gtest.h>

#include <omp.h>

#include <random>

#include "mvp/kernels.hpp"

using namespace mvp;
namespace k = mvp::kernels;

namespace {

struct Cloud {
  GridSpec grid{{{-4.0, -4.0, -4.0}}, {{8.0, 8.0, 8.0}}, {16, 16, 16}};
  std::vector<Vec3> pos, vel;
  std::vector<double> w;
};

Cloud make_cloud(std::size_t n, std::uint64_t seed) {
  Cloud c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0), wd(0.1, 1.0);
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < n; ++i) {
    c.pos.push_back({{u(rng), u(rng), u(rng)}});
    c.vel.push_back({{g(rng), g(rng), g(rng)}});
    c.w.push_back(wd(rng));
  }
  return c;
}

VectorField random_field(const GridSpec& g, std::uint64_t seed) {
  VectorField e(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (auto& comp : e.components) {
    for (double& x : comp) x = n(rng);
  }
  return e;
}

}  // namespace

TEST(Cic, StencilRejectsBoundaryCells) {
  const GridSpec g{{}, {{4.0, 4.0, 4.0}}, {4, 4, 4}};
  k::CicStencil st;
  EXPECT_TRUE(k::cic_stencil(g, {{2.0, 2.0, 2.0}}, st));
  EXPECT_EQ(st.base[0], 1u);
  EXPECT_DOUBLE_EQ(st.frac[0], 0.5);
  EXPECT_FALSE(k::cic_stencil(g, {{0.5, 2.0, 2.0}}, st));
  EXPECT_FALSE(k::cic_stencil(g, {{2.0, 2.0, 3.9}}, st));
}

TEST(Cic, GatherIsAdjointOfDeposit) {
  // <deposit(w), E> h^3 = sum_i w_i gather(E)(x_i) for each component.
  const Cloud c = make_cloud(50, 2);
  const VectorField e = random_field(c.grid, 3);
  std::vector<double> rho(c.grid.size());
  k::serial::deposit_cic(c.grid, c.pos, c.w, rho);
  std::vector<Vec3> at(c.pos.size());
  k::serial::gather_cic(e, c.pos, at);
  for (int a = 0; a < 3; ++a) {
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t n = 0; n < rho.size(); ++n) lhs += rho[n] * e.components[a][n] * c.grid.cell_volume();
    for (std::size_t i = 0; i < at.size(); ++i) rhs += c.w[i] * at[i][a];
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs) + 1e-13);
  }
}

TEST(Kernels, ParallelMatchesSerial) {
  const Cloud c = make_cloud(5000, 7);
  std::vector<double> a(c.grid.size()), b(c.grid.size());
  k::serial::deposit_cic(c.grid, c.pos, c.w, a);
  for (bool det : {false, true}) {
    k::omp::deposit_cic(c.grid, c.pos, c.w, b, det);
    for (std::size_t n = 0; n < a.size(); ++n) EXPECT_NEAR(a[n], b[n], 1e-12 * (1.0 + std::abs(a[n])));
  }

  const VectorField e = random_field(c.grid, 1);
  std::vector<Vec3> ga(c.pos.size()), gb(c.pos.size());
  k::serial::gather_cic(e, c.pos, ga);
  k::omp::gather_cic(e, c.pos, gb);
  EXPECT_EQ(ga, gb);

  const MagneticConfig mag(1.3);
  auto pa = c.pos, va = c.vel, pb = c.pos, vb = c.vel;
  k::serial::free_flow(pa, va, 0.1, mag);
  k::omp::free_flow(pb, vb, 0.1, mag);
  EXPECT_EQ(pa, pb);
  EXPECT_EQ(va, vb);
  k::serial::kick(va, ga, 0.05);
  k::omp::kick(vb, gb, 0.05);
  EXPECT_EQ(va, vb);

  for (double kk : {0.0, 2.0, 3.5}) {
    const double s = k::serial::power_sum(c.vel, c.w, kk);
    EXPECT_NEAR(k::omp::power_sum(c.vel, c.w, kk, false), s, 1e-12 * s);
    EXPECT_NEAR(k::omp::power_sum(c.vel, c.w, kk, true), s, 1e-12 * s);
  }
}

TEST(Kernels, DeterministicReductionsIgnoreThreadCount) {
  const Cloud c = make_cloud(20000, 9);
  std::vector<double> ref(c.grid.size()), other(c.grid.size());
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  k::omp::deposit_cic(c.grid, c.pos, c.w, ref, true);
  const double sum1 = k::omp::power_sum(c.vel, c.w, 3.5, true);
  for (int threads : {2, 3, 8}) {
    omp_set_num_threads(threads);
    k::omp::deposit_cic(c.grid, c.pos, c.w, other, true);
    EXPECT_EQ(ref, other) << threads << " threads";
    EXPECT_EQ(sum1, k::omp::power_sum(c.vel, c.w, 3.5, true)) << threads << " threads";
  }
  omp_set_num_threads(saved);
}

TEST(Kernels, PowerSumExamples) {
  const std::vector<Vec3> v{{{3.0, 0.0, 0.0}}};
  const std::vector<double> w{2.0};
  EXPECT_DOUBLE_EQ(k::serial::power_sum(v, w, 2.0), 18.0);
  EXPECT_DOUBLE_EQ(k::serial::power_sum(v, w, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(k::power_sum(k::Exec::deterministic, v, w, 2.0), 18.0);
}
