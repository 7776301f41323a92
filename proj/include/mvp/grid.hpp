#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mvp/vec3.hpp"

namespace mvp {

// Uniform cell-centred Cartesian mesh. Cell (i, j, k) has centre
// origin + (i + 1/2, j + 1/2, k + 1/2) * h and flat index (i * ny + j) * nz + k.
struct GridSpec {
  Vec3 origin{};
  Vec3 extent{{1.0, 1.0, 1.0}};
  std::array<std::size_t, 3> cells{2, 2, 2};

  // Throws std::invalid_argument unless cells >= 2 and extents > 0 per axis.
  void validate() const;

  double spacing(int axis) const { return extent[axis] / static_cast<double>(cells[axis]); }
  Vec3 spacing() const { return {spacing(0), spacing(1), spacing(2)}; }
  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }
  std::size_t size() const { return cells[0] * cells[1] * cells[2]; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * cells[1] + j) * cells[2] + k;
  }
  Vec3 center(std::size_t i, std::size_t j, std::size_t k) const;
  // True when x is at least one cell away from every face.
  bool in_interior(const Vec3& x, double margin_cells = 1.0) const;

  bool operator==(const GridSpec&) const = default;
};

struct ScalarField {
  GridSpec grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), values(g.size(), 0.0) {}

  double& operator[](std::size_t n) { return values[n]; }
  double operator[](std::size_t n) const { return values[n]; }
  // Sum of values times the cell volume.
  double integral() const;
};

struct VectorField {
  GridSpec grid;
  std::array<std::vector<double>, 3> components;

  VectorField() = default;
  explicit VectorField(const GridSpec& g)
      : grid(g), components{std::vector<double>(g.size(), 0.0), std::vector<double>(g.size(), 0.0),
                            std::vector<double>(g.size(), 0.0)} {}

  Vec3 at(std::size_t n) const { return {components[0][n], components[1][n], components[2][n]}; }
  // Pointwise Euclidean magnitude.
  ScalarField magnitude() const;
};

}  // namespace mvp
