#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "kernels_common.hpp"
#include "mvp/errors.hpp"
#include "mvp/kernels.hpp"

namespace mvp::kernels::omp {

namespace {

constexpr std::size_t kNoError = std::numeric_limits<std::size_t>::max();

std::size_t chunk_begin(std::size_t n, std::size_t chunks, std::size_t c) { return n * c / chunks; }

void raise_domain_error(std::size_t bad, std::span<const Vec3> pos) {
  if (bad != kNoError) throw DomainError(bad, pos[bad][0], pos[bad][1], pos[bad][2]);
}

// Deposit particles [begin, end) into `out`; returns the first index that left
// the interior or kNoError.
std::size_t deposit_range(const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                          std::size_t begin, std::size_t end, double inv_vol, double* out) {
  for (std::size_t i = begin; i < end; ++i) {
    CicStencil st;
    if (!cic_stencil(grid, pos[i], st)) return i;
    detail::scatter(grid, st, w[i] * inv_vol, out);
  }
  return kNoError;
}

}  // namespace

void deposit_cic(const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out, bool deterministic) {
  const std::size_t cells = grid.size();
  const std::size_t n = pos.size();
  const double inv_vol = 1.0 / grid.cell_volume();
  std::size_t bad = kNoError;

  const std::size_t parts =
      deterministic ? kReductionChunks : static_cast<std::size_t>(std::max(omp_get_max_threads(), 1));
  if (parts == 1) {
    std::fill(out.begin(), out.end(), 0.0);
    raise_domain_error(deposit_range(grid, pos, w, 0, n, inv_vol, out.data()), pos);
    return;
  }

  std::vector<double> buffers(parts * cells, 0.0);
  if (deterministic) {
#pragma omp parallel for schedule(static) reduction(min : bad)
    for (std::size_t c = 0; c < parts; ++c) {
      bad = std::min(bad, deposit_range(grid, pos, w, chunk_begin(n, parts, c), chunk_begin(n, parts, c + 1),
                                        inv_vol, buffers.data() + c * cells));
    }
  } else {
#pragma omp parallel reduction(min : bad)
    {
      const auto t = static_cast<std::size_t>(omp_get_thread_num());
      const auto nt = static_cast<std::size_t>(omp_get_num_threads());
      if (t < parts) {
        bad = std::min(bad, deposit_range(grid, pos, w, chunk_begin(n, nt, t), chunk_begin(n, nt, t + 1),
                                          inv_vol, buffers.data() + t * cells));
      }
    }
  }
  raise_domain_error(bad, pos);

#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < cells; ++m) {
    double s = 0.0;
    for (std::size_t c = 0; c < parts; ++c) s += buffers[c * cells + m];
    out[m] = s;
  }
}

void gather_cic(const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out) {
  std::size_t bad = kNoError;
  const auto n = static_cast<std::int64_t>(pos.size());
#pragma omp parallel for schedule(static) reduction(min : bad)
  for (std::int64_t i = 0; i < n; ++i) {
    CicStencil st;
    if (!cic_stencil(e.grid, pos[i], st)) {
      bad = std::min(bad, static_cast<std::size_t>(i));
      continue;
    }
    out[i] = detail::gather(e, st);
  }
  raise_domain_error(bad, pos);
}

void kick(std::span<Vec3> vel, std::span<const Vec3> accel, double dt) {
  const auto n = static_cast<std::int64_t>(vel.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) vel[i] += dt * accel[i];
}

void free_flow(std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag) {
  const detail::FlowCoefficients fc(dt, mag);
  const auto n = static_cast<std::int64_t>(pos.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) fc.apply(pos[i], vel[i]);
}

double power_sum(std::span<const Vec3> vel, std::span<const double> w, double k, bool deterministic) {
  const std::size_t n = vel.size();
  if (!deterministic) {
    double sum = 0.0;
    const auto ni = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) reduction(+ : sum)
    for (std::int64_t i = 0; i < ni; ++i) sum += w[i] * detail::speed_power(vel[i], k);
    return sum;
  }
  double partial[kReductionChunks] = {};
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < kReductionChunks; ++c) {
    double s = 0.0;
    for (std::size_t i = chunk_begin(n, kReductionChunks, c); i < chunk_begin(n, kReductionChunks, c + 1); ++i) {
      s += w[i] * detail::speed_power(vel[i], k);
    }
    partial[c] = s;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

}  // namespace mvp::kernels::omp
