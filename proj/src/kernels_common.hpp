#pragma once

// Per-particle building blocks shared by the serial and OpenMP kernels.

#include <cmath>

#include "mvp/kernels.hpp"

namespace mvp::kernels::detail {

struct FlowCoefficients {
  FlowCoefficients(double dt, const MagneticConfig& mag);

  void apply(Vec3& x, Vec3& v) const {
    x = {x[0] + v[0] * so + v[1] * co, x[1] - v[0] * co + v[1] * so, x[2] + v[2] * dt};
    v = {v[0] * c + v[1] * s, -v[0] * s + v[1] * c, v[2]};
  }

  double dt, c, s, so, co;
};

inline void scatter(const GridSpec& grid, const CicStencil& st, double q, double* out) {
  const std::size_t ny = grid.cells[1], nz = grid.cells[2];
  const double fx[2] = {1.0 - st.frac[0], st.frac[0]};
  const double fy[2] = {1.0 - st.frac[1], st.frac[1]};
  const double fz[2] = {1.0 - st.frac[2], st.frac[2]};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::size_t row = ((st.base[0] + a) * ny + st.base[1] + b) * nz + st.base[2];
      const double wab = q * fx[a] * fy[b];
      out[row] += wab * fz[0];
      out[row + 1] += wab * fz[1];
    }
  }
}

inline Vec3 gather(const VectorField& e, const CicStencil& st) {
  const GridSpec& grid = e.grid;
  const std::size_t ny = grid.cells[1], nz = grid.cells[2];
  const double fx[2] = {1.0 - st.frac[0], st.frac[0]};
  const double fy[2] = {1.0 - st.frac[1], st.frac[1]};
  const double fz[2] = {1.0 - st.frac[2], st.frac[2]};
  Vec3 r{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const std::size_t row = ((st.base[0] + a) * ny + st.base[1] + b) * nz + st.base[2];
      const double wab = fx[a] * fy[b];
      for (int c = 0; c < 3; ++c) {
        const double* comp = e.components[c].data();
        r[c] += wab * (fz[0] * comp[row] + fz[1] * comp[row + 1]);
      }
    }
  }
  return r;
}

inline double speed_power(const Vec3& v, double k) {
  if (k == 0.0) return 1.0;
  const double s2 = norm2(v);
  if (k == 2.0) return s2;
  if (k == 4.0) return s2 * s2;
  return std::pow(s2, 0.5 * k);
}

}  // namespace mvp::kernels::detail
