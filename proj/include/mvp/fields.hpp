#pragma once

// Charge deposition, the free-space field E = -grad K3 * rho and the norms
// used throughout the estimates.

#include <complex>
#include <cstddef>
#include <memory>

#include "mvp/grid.hpp"
#include "mvp/kernels.hpp"
#include "mvp/particles.hpp"

namespace mvp {

inline constexpr std::size_t kDefaultFieldMemoryBudget = std::size_t{4} << 30;

// Cloud-in-cell density; integral equals the total weight.
ScalarField deposit_density(const ParticleEnsemble& ens, const GridSpec& grid,
                            kernels::Exec exec = kernels::Exec::parallel);

// Isolated-boundary Poisson solver (Hockney-Eastwood domain doubling).
//
// E_n = h^3 sum_m G(x_n - x_m) rho_m with G(r) = r / (4 pi |r|^3) sampled at
// cell-centre displacements and G(0) = 0, the cell average of the odd kernel
// over the self cell. The convolution is evaluated exactly through FFTs on the
// doubled grid. Kernel spectra are computed once per solver.
class FreeSpacePoissonSolver {
 public:
  explicit FreeSpacePoissonSolver(const GridSpec& grid,
                                  std::size_t memory_budget = kDefaultFieldMemoryBudget);
  ~FreeSpacePoissonSolver();
  FreeSpacePoissonSolver(FreeSpacePoissonSolver&&) noexcept;
  FreeSpacePoissonSolver& operator=(FreeSpacePoissonSolver&&) noexcept;

  const GridSpec& grid() const;
  VectorField solve(const ScalarField& rho);
  // Bytes the doubled-grid buffers need for `grid`.
  static std::size_t required_bytes(const GridSpec& grid);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around FreeSpacePoissonSolver.
VectorField solve_field(const ScalarField& rho, std::size_t memory_budget = kDefaultFieldMemoryBudget);

// (sum |f|^p h^3)^{1/p}; p = infinity gives the max magnitude. Vector fields
// use the pointwise Euclidean magnitude.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& f, double p);

// sup_A |A|^{-1/q'} int_A |f| over unions of cells, attained on superlevel
// sets of |f|.
double weak_lq_norm(const ScalarField& f, double q);
double weak_lq_norm(const VectorField& f, double q);

// 1/2 sum w |v|^2 + 1/2 int |E|^2.
double energy(const ParticleEnsemble& ens, const VectorField& e);

}  // namespace mvp
