#include <algorithm>
#include <cmath>
#include <limits>

#include "kernels_common.hpp"
#include "mvp/errors.hpp"
#include "mvp/kernels.hpp"

namespace mvp::kernels {

bool cic_stencil(const GridSpec& grid, const Vec3& x, CicStencil& st) {
  for (int a = 0; a < 3; ++a) {
    const double h = grid.spacing(a);
    const double u = (x[a] - grid.origin[a]) / h - 0.5;
    // one-cell margin: u in [0.5, n - 1.5]
    if (!(u >= 0.5 && u <= static_cast<double>(grid.cells[a]) - 1.5)) return false;
    const double fl = std::floor(u);
    st.base[a] = static_cast<std::size_t>(fl);
    st.frac[a] = u - fl;
  }
  return true;
}

namespace detail {

FlowCoefficients::FlowCoefficients(double dt, const MagneticConfig& mag) : dt(dt) {
  const double a = mag.omega() * dt;
  c = std::cos(a);
  s = std::sin(a);
  so = sin_over_omega(mag.omega(), dt);
  co = one_minus_cos_over_omega(mag.omega(), dt);
}

}  // namespace detail

namespace serial {

void deposit_cic(const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const double inv_vol = 1.0 / grid.cell_volume();
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CicStencil st;
    if (!cic_stencil(grid, pos[i], st)) throw DomainError(i, pos[i][0], pos[i][1], pos[i][2]);
    detail::scatter(grid, st, w[i] * inv_vol, out.data());
  }
}

void gather_cic(const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out) {
  for (std::size_t i = 0; i < pos.size(); ++i) {
    CicStencil st;
    if (!cic_stencil(e.grid, pos[i], st)) throw DomainError(i, pos[i][0], pos[i][1], pos[i][2]);
    out[i] = detail::gather(e, st);
  }
}

void kick(std::span<Vec3> vel, std::span<const Vec3> accel, double dt) {
  for (std::size_t i = 0; i < vel.size(); ++i) vel[i] += dt * accel[i];
}

void free_flow(std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag) {
  const detail::FlowCoefficients fc(dt, mag);
  for (std::size_t i = 0; i < pos.size(); ++i) fc.apply(pos[i], vel[i]);
}

double power_sum(std::span<const Vec3> vel, std::span<const double> w, double k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < vel.size(); ++i) sum += w[i] * detail::speed_power(vel[i], k);
  return sum;
}

}  // namespace serial

void deposit_cic(Exec exec, const GridSpec& grid, std::span<const Vec3> pos, std::span<const double> w,
                 std::span<double> out) {
  if (exec == Exec::serial) return serial::deposit_cic(grid, pos, w, out);
  omp::deposit_cic(grid, pos, w, out, exec == Exec::deterministic);
}

void gather_cic(Exec exec, const VectorField& e, std::span<const Vec3> pos, std::span<Vec3> out) {
  if (exec == Exec::serial) return serial::gather_cic(e, pos, out);
  omp::gather_cic(e, pos, out);
}

void kick(Exec exec, std::span<Vec3> vel, std::span<const Vec3> accel, double dt) {
  if (exec == Exec::serial) return serial::kick(vel, accel, dt);
  omp::kick(vel, accel, dt);
}

void free_flow(Exec exec, std::span<Vec3> pos, std::span<Vec3> vel, double dt, const MagneticConfig& mag) {
  if (exec == Exec::serial) return serial::free_flow(pos, vel, dt, mag);
  omp::free_flow(pos, vel, dt, mag);
}

double power_sum(Exec exec, std::span<const Vec3> vel, std::span<const double> w, double k) {
  if (exec == Exec::serial) return serial::power_sum(vel, w, k);
  return omp::power_sum(vel, w, k, exec == Exec::deterministic);
}

}  // namespace mvp::kernels
