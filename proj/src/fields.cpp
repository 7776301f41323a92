#include "mvp/fields.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mvp/errors.hpp"

namespace mvp {

namespace {

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void init_fftw_threads() {
  static std::once_flag once;
  std::call_once(once, [] { fftw_init_threads(); });
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
std::unique_ptr<T[], FftwFree> fftw_array(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T[], FftwFree>(p);
}

// Signed displacement (in cells) of doubled-grid index a.
double wrapped(std::size_t a, std::size_t n) {
  if (a < n) return static_cast<double>(a);
  if (a == n) return 0.0;  // never coupled to a physical cell pair
  return static_cast<double>(a) - 2.0 * static_cast<double>(n);
}

double magnitude_at(const VectorField& f, std::size_t n) {
  const double a = f.components[0][n], b = f.components[1][n], c = f.components[2][n];
  return std::sqrt(a * a + b * b + c * c);
}

void require_p(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
}

template <class Magnitude>
double lp_impl(std::size_t n, double vol, double p, Magnitude mag) {
  require_p(p);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, mag(i));
    return m;
  }
  double s = 0.0;
  if (p == 1.0) {
    for (std::size_t i = 0; i < n; ++i) s += mag(i);
    return s * vol;
  }
  if (p == 2.0) {
    for (std::size_t i = 0; i < n; ++i) s += mag(i) * mag(i);
    return std::sqrt(s * vol);
  }
  // scale out the max to keep large p from overflowing
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, mag(i));
  if (m == 0.0) return 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::pow(mag(i) / m, p);
  return m * std::pow(s * vol, 1.0 / p);
}

double weak_impl(std::vector<double> a, double vol, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("weak_lq_norm needs q > 1");
  std::stable_sort(a.begin(), a.end(), std::greater<double>());
  const double inv_qp = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;
  double best = 0.0, prefix = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) break;
    prefix += a[k];
    const double measure = static_cast<double>(k + 1) * vol;
    best = std::max(best, std::pow(measure, -inv_qp) * prefix * vol);
  }
  return best;
}

}  // namespace

ScalarField deposit_density(const ParticleEnsemble& ens, const GridSpec& grid, kernels::Exec exec) {
  grid.validate();
  ScalarField rho(grid);
  kernels::deposit_cic(exec, grid, ens.positions, ens.weights, rho.values);
  return rho;
}

struct FreeSpacePoissonSolver::Impl {
  GridSpec grid;
  std::array<int, 3> dims{};
  std::size_t nreal = 0, ncomplex = 0;
  std::unique_ptr<double[], FftwFree> real;
  std::unique_ptr<fftw_complex[], FftwFree> rho_hat, work;
  std::array<std::unique_ptr<fftw_complex[], FftwFree>, 3> kernel_hat;
  fftw_plan forward = nullptr, inverse = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
  // copies rho into the zero-padded buffer and transforms it into rho_hat
  void load(const ScalarField& rho);
  // out = kernel c convolved with rho_hat, restricted to the physical grid
  void convolve(int c, std::vector<double>& out);
};

std::size_t FreeSpacePoissonSolver::required_bytes(const GridSpec& grid) {
  const std::size_t n0 = 2 * grid.cells[0], n1 = 2 * grid.cells[1], n2 = 2 * grid.cells[2];
  const std::size_t nreal = n0 * n1 * n2;
  const std::size_t ncomplex = n0 * n1 * (n2 / 2 + 1);
  return nreal * sizeof(double) + 5 * ncomplex * sizeof(fftw_complex);
}

FreeSpacePoissonSolver::FreeSpacePoissonSolver(const GridSpec& grid, std::size_t memory_budget)
    : impl_(std::make_unique<Impl>()) {
  grid.validate();
  const std::size_t need = required_bytes(grid);
  if (need > memory_budget) {
    throw MemoryBudgetError("doubled field grid needs " + std::to_string(need) + " bytes, budget is " +
                            std::to_string(memory_budget));
  }
  Impl& m = *impl_;
  m.grid = grid;
  for (int a = 0; a < 3; ++a) m.dims[a] = static_cast<int>(2 * grid.cells[a]);
  m.nreal = static_cast<std::size_t>(m.dims[0]) * m.dims[1] * m.dims[2];
  m.ncomplex = static_cast<std::size_t>(m.dims[0]) * m.dims[1] * (m.dims[2] / 2 + 1);
  m.real = fftw_array<double>(m.nreal);
  m.rho_hat = fftw_array<fftw_complex>(m.ncomplex);
  m.work = fftw_array<fftw_complex>(m.ncomplex);
  for (auto& k : m.kernel_hat) k = fftw_array<fftw_complex>(m.ncomplex);

  init_fftw_threads();
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_plan_with_nthreads(std::max(omp_get_max_threads(), 1));
    m.forward = fftw_plan_dft_r2c_3d(m.dims[0], m.dims[1], m.dims[2], m.real.get(), m.work.get(), FFTW_ESTIMATE);
    m.inverse = fftw_plan_dft_c2r_3d(m.dims[0], m.dims[1], m.dims[2], m.work.get(), m.real.get(), FFTW_ESTIMATE);
  }
  if (!m.forward || !m.inverse) throw std::runtime_error("FFTW planning failed");

  const Vec3 h = grid.spacing();
  const std::size_t d0 = m.dims[0], d1 = m.dims[1], d2 = m.dims[2];
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  for (int c = 0; c < 3; ++c) {
#pragma omp parallel for schedule(static)
    for (std::size_t a = 0; a < d0; ++a) {
      const double rx = wrapped(a, grid.cells[0]) * h[0];
      for (std::size_t b = 0; b < d1; ++b) {
        const double ry = wrapped(b, grid.cells[1]) * h[1];
        for (std::size_t e = 0; e < d2; ++e) {
          const double rz = wrapped(e, grid.cells[2]) * h[2];
          const double r2 = rx * rx + ry * ry + rz * rz;
          const double r[3] = {rx, ry, rz};
          m.real[(a * d1 + b) * d2 + e] = r2 == 0.0 ? 0.0 : inv4pi * r[c] / (r2 * std::sqrt(r2));
        }
      }
    }
    fftw_execute_dft_r2c(m.forward, m.real.get(), m.kernel_hat[c].get());
  }
}

void FreeSpacePoissonSolver::Impl::load(const ScalarField& rho) {
  if (!(rho.grid == grid)) throw std::invalid_argument("density grid does not match the solver grid");
  const std::size_t nx = grid.cells[0], ny = grid.cells[1], nz = grid.cells[2];
  const std::size_t d1 = dims[1], d2 = dims[2];
  std::fill(real.get(), real.get() + nreal, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double* src = rho.values.data() + (i * ny + j) * nz;
      std::copy(src, src + nz, real.get() + (i * d1 + j) * d2);
    }
  }
  fftw_execute_dft_r2c(forward, real.get(), rho_hat.get());
}

void FreeSpacePoissonSolver::Impl::convolve(int c, std::vector<double>& out) {
  const std::size_t nx = grid.cells[0], ny = grid.cells[1], nz = grid.cells[2];
  const std::size_t d1 = dims[1], d2 = dims[2];
  const double scale = grid.cell_volume() / static_cast<double>(nreal);
  const fftw_complex* k = kernel_hat[c].get();
  const fftw_complex* r = rho_hat.get();
  fftw_complex* w = work.get();
  const std::size_t nc = ncomplex;
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < nc; ++n) {
    w[n][0] = k[n][0] * r[n][0] - k[n][1] * r[n][1];
    w[n][1] = k[n][0] * r[n][1] + k[n][1] * r[n][0];
  }
  fftw_execute_dft_c2r(inverse, work.get(), real.get());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double* src = real.get() + (i * d1 + j) * d2;
      double* dst = out.data() + (i * ny + j) * nz;
      for (std::size_t l = 0; l < nz; ++l) dst[l] = src[l] * scale;
    }
  }
}

FreeSpacePoissonSolver::~FreeSpacePoissonSolver() = default;
FreeSpacePoissonSolver::FreeSpacePoissonSolver(FreeSpacePoissonSolver&&) noexcept = default;
FreeSpacePoissonSolver& FreeSpacePoissonSolver::operator=(FreeSpacePoissonSolver&&) noexcept = default;

const GridSpec& FreeSpacePoissonSolver::grid() const { return impl_->grid; }

VectorField FreeSpacePoissonSolver::solve(const ScalarField& rho) {
  Impl& m = *impl_;
  m.load(rho);
  VectorField e(m.grid);
  for (int c = 0; c < 3; ++c) m.convolve(c, e.components[c]);
  return e;
}

VectorField solve_field(const ScalarField& rho, std::size_t memory_budget) {
  FreeSpacePoissonSolver solver(rho.grid, memory_budget);
  return solver.solve(rho);
}

double lp_norm(const ScalarField& f, double p) {
  return lp_impl(f.values.size(), f.grid.cell_volume(), p, [&](std::size_t i) { return std::abs(f.values[i]); });
}

double lp_norm(const VectorField& f, double p) {
  return lp_impl(f.components[0].size(), f.grid.cell_volume(), p,
                 [&](std::size_t i) { return magnitude_at(f, i); });
}

double weak_lq_norm(const ScalarField& f, double q) {
  std::vector<double> a(f.values.size());
  std::transform(f.values.begin(), f.values.end(), a.begin(), [](double x) { return std::abs(x); });
  return weak_impl(std::move(a), f.grid.cell_volume(), q);
}

double weak_lq_norm(const VectorField& f, double q) {
  return weak_impl(f.magnitude().values, f.grid.cell_volume(), q);
}

double energy(const ParticleEnsemble& ens, const VectorField& e) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) kinetic += ens.weights[i] * norm2(ens.velocities[i]);
  double field = 0.0;
  for (std::size_t n = 0; n < e.components[0].size(); ++n) {
    const double m = magnitude_at(e, n);
    field += m * m;
  }
  return 0.5 * kinetic + 0.5 * field * e.grid.cell_volume();
}

}  // namespace mvp
