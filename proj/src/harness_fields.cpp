#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mvp/harness.hpp"

namespace mvp::harness {

namespace {

constexpr double kPi = std::numbers::pi;

struct Blob {
  Vec3 center;
  double sigma;
  double charge;
};

double blob_density(const std::vector<Blob>& blobs, const Vec3& x) {
  double rho = 0.0;
  for (const auto& b : blobs) {
    const double s2 = b.sigma * b.sigma;
    rho += b.charge * std::exp(-0.5 * norm2(x - b.center) / s2) / std::pow(2.0 * kPi * s2, 1.5);
  }
  return rho;
}

ScalarField sample_blobs(const GridSpec& g, const std::vector<Blob>& blobs) {
  ScalarField f(g);
  for (std::size_t i = 0; i < g.cells[0]; ++i)
    for (std::size_t j = 0; j < g.cells[1]; ++j)
      for (std::size_t k = 0; k < g.cells[2]; ++k) f[g.index(i, j, k)] = blob_density(blobs, g.center(i, j, k));
  return f;
}

std::vector<Blob> random_blobs(std::mt19937_64& rng, double spread, double smin, double smax, bool signed_charges) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), width(smin, smax), q(0.5, 1.5);
  std::vector<Blob> blobs(static_cast<std::size_t>(count(rng)));
  for (auto& b : blobs) {
    b.center = {spread * u(rng), spread * u(rng), spread * u(rng)};
    b.sigma = width(rng);
    b.charge = q(rng) * (signed_charges && u(rng) < 0.0 ? -1.0 : 1.0);
  }
  return blobs;
}

GridSpec cube(double half_width, std::size_t n) {
  return GridSpec{{{-half_width, -half_width, -half_width}}, {{2 * half_width, 2 * half_width, 2 * half_width}},
                  {n, n, n}};
}

}  // namespace

double gaussian_radial_field(double r, double sigma, double charge) {
  if (r <= 0.0) return 0.0;
  const double norm = charge / std::pow(2.0 * kPi * sigma * sigma, 1.5);
  auto shell = [&](double u) { return 4.0 * kPi * u * u * norm * std::exp(-0.5 * u * u / (sigma * sigma)); };
  const double enclosed = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(shell, 0.0, r, 15, 1e-15);
  return enclosed / (4.0 * kPi * r * r);
}

std::vector<ConvergenceLevel> gaussian_blob_convergence(const std::vector<std::size_t>& cells, double half_width,
                                                        double sigma) {
  std::vector<ConvergenceLevel> out;
  for (std::size_t n : cells) {
    const GridSpec g = cube(half_width, n);
    const ScalarField rho = sample_blobs(g, {Blob{Vec3{}, sigma, 1.0}});
    const VectorField e = solve_field(rho);
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          const Vec3 x = g.center(i, j, k);
          const double r = norm(x);
          const Vec3 exact = gaussian_radial_field(r, sigma) / r * x;
          const Vec3 diff = e.at(g.index(i, j, k)) - exact;
          err2 += norm2(diff);
          ref2 += norm2(exact);
        }
      }
    }
    out.push_back({n, g.spacing(0), std::sqrt(err2 / ref2)});
  }
  return out;
}

EstimateReport check_poisson_convergence(const std::vector<std::size_t>& cells) {
  EstimateReport rep;
  rep.name = "fields.poisson_convergence";
  rep.threshold = 1.0 / 3.5;
  rep.notes.emplace_back("measure", "inverse of the smallest L2 error ratio per grid refinement");
  const auto levels = gaussian_blob_convergence(cells);
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    rep.fitted["l2_error_n" + std::to_string(levels[i].cells)] = levels[i].l2_error;
    if (i > 0) min_ratio = std::min(min_ratio, levels[i - 1].l2_error / levels[i].l2_error);
  }
  rep.samples = levels.size();
  rep.fitted["min_ratio"] = min_ratio;
  rep.max_ratio = 1.0 / min_ratio;
  rep.finalize();
  return rep;
}

double weak_norm_bruteforce(const ScalarField& f, double q) {
  std::vector<double> nz;
  for (double v : f.values) {
    if (v != 0.0) nz.push_back(std::abs(v));
  }
  if (nz.size() > 24) throw std::invalid_argument("weak_norm_bruteforce: too many nonzero cells");
  const double vol = f.grid.cell_volume();
  const double inv_qp = 1.0 - 1.0 / q;
  double best = 0.0;
  const std::uint32_t subsets = std::uint32_t{1} << nz.size();
  for (std::uint32_t mask = 1; mask < subsets; ++mask) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t b = 0; b < nz.size(); ++b) {
      if (mask & (std::uint32_t{1} << b)) {
        sum += nz[b];
        ++count;
      }
    }
    best = std::max(best, std::pow(count * vol, -inv_qp) * sum * vol);
  }
  return best;
}

EstimateReport check_weak_norm(std::size_t trials, std::uint64_t seed, const std::vector<double>& qs) {
  EstimateReport rep;
  rep.name = "fields.weak_norm_oracle";
  rep.threshold = 1e-12;
  rep.notes.emplace_back("measure", "max relative difference to the exhaustive subset oracle");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_real_distribution<double> mag(0.1, 3.0), ext(0.5, 2.0);
  for (std::size_t t = 0; t < trials; ++t) {
    GridSpec g{{}, {{ext(rng), ext(rng), ext(rng)}}, {4, 4, 4}};
    ScalarField f(g);
    std::vector<std::size_t> cells(g.size());
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
      double v = mag(rng);
      if (i > 0 && t % 4 == 0) v = f[cells[0]];  // exercise ties
      f[cells[i]] = (rng() & 1) ? v : -v;
    }
    for (double q : qs) {
      const double fast = weak_lq_norm(f, q);
      const double oracle = weak_norm_bruteforce(f, q);
      rep.max_ratio = std::max(rep.max_ratio, std::abs(fast - oracle) / oracle);
      ++rep.samples;
    }
  }
  rep.finalize();
  return rep;
}

EstimateReport check_lineq1(std::size_t trials, std::uint64_t seed) {
  EstimateReport rep;
  rep.name = "inequalities.lineq_1";
  rep.threshold = 0.0;
  rep.notes.emplace_back("measure", "violation count");
  const double constant = 3.0 * std::pow(1.5, 2.0 / 3.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GridSpec g = cube(2.0, 8);
  const double vol = g.cell_volume();
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    ScalarField a(g), b(g);
    const int kind = static_cast<int>(t % 4);
    const double sparsity = u(rng);
    const double radius = 0.3 + 1.7 * u(rng);
    for (std::size_t n = 0; n < g.size(); ++n) {
      a[n] = u(rng) < sparsity ? 0.0 : std::exp(4.0 * (u(rng) - 0.5));
      const double r = norm(g.center(n / 64, (n / 8) % 8, n % 8));
      if (kind == 3) {
        // near extremal: ball indicator against the Coulomb profile
        a[n] = r < radius ? 1.0 : 0.0;
        b[n] = 1.0 / (4.0 * kPi * r * r);
      } else if (kind == 0) {
        b[n] = 1.0 / (4.0 * kPi * r * r);  // the Coulomb gradient profile
      } else if (kind == 1) {
        b[n] = (u(rng) - 0.5) * std::exp(6.0 * (u(rng) - 0.5));
      } else {
        b[n] = u(rng) < 0.9 ? 0.0 : u(rng);
      }
    }
    double lhs = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) lhs += std::abs(a[n] * b[n]);
    lhs *= vol;
    const double rhs = constant * std::cbrt(lp_norm(a, 1.0)) * std::pow(lp_norm(a, kInf), 2.0 / 3.0) *
                       weak_lq_norm(b, 1.5);
    if (lhs > rhs * (1.0 + 1e-12)) rep.max_ratio += 1.0;
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    ++rep.samples;
  }
  rep.fitted["max_lhs_over_rhs"] = worst;
  rep.finalize();
  return rep;
}

double coulomb_gradient_weak_norm() { return std::cbrt(3.0 / (4.0 * kPi)); }

EstimateReport probe_weak_young(std::size_t trials, std::uint64_t seed, double bound) {
  EstimateReport rep;
  rep.name = "fields.weak_young_probe";
  rep.threshold = bound;
  rep.notes.emplace_back("measure", "max ||f * grad K3||_r / (||f||_p ||grad K3||_{3/2,w}), 1/r = 1/p - 1/3");
  std::mt19937_64 rng(seed);
  const double kw = coulomb_gradient_weak_norm();
  double lo = std::numeric_limits<double>::infinity();
  const GridSpec g = cube(10.0, 32);
  FreeSpacePoissonSolver solver(g);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto blobs = random_blobs(rng, 3.0, 0.7, 2.0, false);
    const ScalarField f = sample_blobs(g, blobs);
    const VectorField e = solver.solve(f);
    for (double p : {1.5, 2.0, 2.5}) {
      const double r = 1.0 / (1.0 / p - 1.0 / 3.0);
      const double ratio = lp_norm(e, r) / (lp_norm(f, p) * kw);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      lo = std::min(lo, ratio);
      ++rep.samples;
    }
  }
  rep.fitted["min_ratio"] = lo;
  rep.fitted["C"] = rep.max_ratio;
  rep.finalize();
  return rep;
}

EstimateReport probe_calderon_zygmund(std::size_t trials, std::uint64_t seed, double bound) {
  EstimateReport rep;
  rep.name = "fields.calderon_zygmund_probe";
  rep.threshold = bound;
  rep.notes.emplace_back("measure", "max ||d_j E_i||_p / ||g||_p over i, j and p in {2, 4}");
  std::mt19937_64 rng(seed);
  const std::size_t n = 32;
  const GridSpec g = cube(8.0, n);
  const double h = g.spacing(0);
  FreeSpacePoissonSolver solver(g);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto blobs = random_blobs(rng, 2.5, 0.8, 1.6, true);
    const ScalarField f = sample_blobs(g, blobs);
    const VectorField e = solver.solve(f);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        ScalarField d(g);
        for (std::size_t a = 1; a + 1 < n; ++a)
          for (std::size_t b = 1; b + 1 < n; ++b)
            for (std::size_t c = 1; c + 1 < n; ++c) {
              std::array<std::size_t, 3> up{a, b, c}, dn{a, b, c};
              ++up[j];
              --dn[j];
              d[g.index(a, b, c)] =
                  (e.components[i][g.index(up[0], up[1], up[2])] - e.components[i][g.index(dn[0], dn[1], dn[2])]) /
                  (2.0 * h);
            }
        for (double p : {2.0, 4.0}) {
          rep.max_ratio = std::max(rep.max_ratio, lp_norm(d, p) / lp_norm(f, p));
          ++rep.samples;
        }
      }
    }
  }
  rep.fitted["C"] = rep.max_ratio;
  rep.finalize();
  return rep;
}

std::vector<EstimateReport> verify_fields() {
  return {check_poisson_convergence(), check_weak_norm(), check_lineq1(), probe_weak_young(),
          probe_calderon_zygmund()};
}

}  // namespace mvp::harness
