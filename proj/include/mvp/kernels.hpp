#pragma once

// Particle/mesh inner loops. Every kernel has a plain serial reference in
// kernels::serial and an OpenMP version in kernels::omp. Reductions in the
// OpenMP versions take a `deterministic` flag: when set, work is split into a
// fixed number of chunks that is independent of the thread count and partial
// results are combined in chunk order, so the result is bitwise reproducible
// for any OMP_NUM_THREADS.

#include <cstddef>
#include <span>

#include "mvp/grid.hpp"
#include "mvp/kinematics.hpp"

namespace mvp::kernels {

enum class Exec { serial, parallel, deterministic };

inline constexpr std::size_t kReductionChunks = 16;

// Cloud-in-cell stencil of a point relative to the cell centres.
struct CicStencil {
  std::array<std::size_t, 3> base;
  std::array<double, 3> frac;
};

// Returns false when x lies outside the one-cell interior margin.
bool cic_stencil(const GridSpec& grid, const Vec3& x, CicStencil& st);

namespace serial {

// out[n] = sum_i w_i W_n(x_i) / h^3. `out` is overwritten.
void deposit_cic(const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out);
// out_i = sum_n W_n(x_i) E_n, the adjoint of deposit_cic.
void gather_cic(const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out);
void kick(std::span<Vec3> vel, std::span<const Vec3> accel, double dt);
// Exact E = 0 characteristic map over dt.
void free_flow(std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag);
// sum_i w_i |v_i|^k
double power_sum(std::span<const Vec3> vel, std::span<const double> w, double k);

}  // namespace serial

namespace omp {

void deposit_cic(const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out, bool deterministic);
void gather_cic(const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out);
void kick(std::span<Vec3> vel, std::span<const Vec3> accel, double dt);
void free_flow(std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag);
double power_sum(std::span<const Vec3> vel, std::span<const double> w, double k, bool deterministic);

}  // namespace omp

// Dispatch on an execution policy.
void deposit_cic(Exec exec, const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out);
void gather_cic(Exec exec, const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out);
void kick(Exec exec, std::span<Vec3> vel, std::span<const Vec3> accel, double dt);
void free_flow(Exec exec, std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag);
double power_sum(Exec exec, std::span<const Vec3> vel, std::span<const double> w, double k);

}  // namespace mvp::kernels
