// Serial reference kernels against their OpenMP versions.
//
//   OMP_NUM_THREADS=8 ./mvp_bench --benchmark_filter=Deposit

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "mvp/kernels.hpp"

using namespace mvp;
namespace k = mvp::kernels;

namespace {

struct Setup {
  GridSpec grid{{{-20.0, -20.0, -20.0}}, {{40.0, 40.0, 40.0}}, {64, 64, 64}};
  std::vector<Vec3> pos, vel, acc;
  std::vector<double> w, rho;
  VectorField e{grid};
  MagneticConfig mag{1.0};

  explicit Setup(std::size_t n) : rho(grid.size()) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      pos.push_back({{g(rng), g(rng), g(rng)}});
      vel.push_back({{0.2 * g(rng), 0.2 * g(rng), 0.2 * g(rng)}});
      w.push_back(1.0 / static_cast<double>(n));
    }
    acc.assign(n, Vec3{{1e-3, 0.0, -1e-3}});
    for (auto& c : e.components) {
      for (double& x : c) x = g(rng);
    }
  }
};

Setup& setup(std::size_t n) {
  static std::map<std::size_t, Setup> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Setup(n)).first;
  return it->second;
}

void items(benchmark::State& st) { st.SetItemsProcessed(st.iterations() * st.range(0)); }

void DepositSerial(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::serial::deposit_cic(s.grid, s.pos, s.w, s.rho);
  items(st);
}
void DepositOmp(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::omp::deposit_cic(s.grid, s.pos, s.w, s.rho, false);
  items(st);
}
void DepositOmpDeterministic(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::omp::deposit_cic(s.grid, s.pos, s.w, s.rho, true);
  items(st);
}

void GatherSerial(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::serial::gather_cic(s.e, s.pos, s.acc);
  items(st);
}
void GatherOmp(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::omp::gather_cic(s.e, s.pos, s.acc);
  items(st);
}

void KickSerial(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::serial::kick(s.vel, s.acc, 0.0);
  items(st);
}
void KickOmp(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::omp::kick(s.vel, s.acc, 0.0);
  items(st);
}

// zero-length steps keep the particles in place between iterations
void FreeFlowSerial(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::serial::free_flow(s.pos, s.vel, 0.0, s.mag);
  items(st);
}
void FreeFlowOmp(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) k::omp::free_flow(s.pos, s.vel, 0.0, s.mag);
  items(st);
}

void PowerSumSerial(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(k::serial::power_sum(s.vel, s.w, 3.5));
  items(st);
}
void PowerSumOmp(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(k::omp::power_sum(s.vel, s.w, 3.5, false));
  items(st);
}
void PowerSumOmpDeterministic(benchmark::State& st) {
  Setup& s = setup(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(k::omp::power_sum(s.vel, s.w, 3.5, true));
  items(st);
}

}  // namespace

#define MVP_BENCH(fn) BENCHMARK(fn)->Arg(10000)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMicrosecond)

MVP_BENCH(DepositSerial);
MVP_BENCH(DepositOmp);
MVP_BENCH(DepositOmpDeterministic);
MVP_BENCH(GatherSerial);
MVP_BENCH(GatherOmp);
MVP_BENCH(KickSerial);
MVP_BENCH(KickOmp);
MVP_BENCH(FreeFlowSerial);
MVP_BENCH(FreeFlowOmp);
MVP_BENCH(PowerSumSerial);
MVP_BENCH(PowerSumOmp);
MVP_BENCH(PowerSumOmpDeterministic);

BENCHMARK_MAIN();
