#include "mvp/grid.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mvp/errors.hpp"

namespace mvp {

DomainError::DomainError(std::size_t index, double x, double y, double z)
    : Error("particle " + std::to_string(index) + " at (" + std::to_string(x) + ", " +
            std::to_string(y) + ", " + std::to_string(z) + ") is outside the grid interior"),
      index_(index) {}

ConfigError::ConfigError(const std::string& what, int line, int column)
    : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                     : what),
      line_(line),
      column_(column) {}

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (cells[a] < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a])) {
      throw std::invalid_argument("grid extent must be positive and finite");
    }
    if (!std::isfinite(origin[a])) throw std::invalid_argument("grid origin must be finite");
  }
}

Vec3 GridSpec::center(std::size_t i, std::size_t j, std::size_t k) const {
  return {origin[0] + (static_cast<double>(i) + 0.5) * spacing(0),
          origin[1] + (static_cast<double>(j) + 0.5) * spacing(1),
          origin[2] + (static_cast<double>(k) + 0.5) * spacing(2)};
}

bool GridSpec::in_interior(const Vec3& x, double margin_cells) const {
  for (int a = 0; a < 3; ++a) {
    const double m = margin_cells * spacing(a);
    if (!(x[a] >= origin[a] + m && x[a] <= origin[a] + extent[a] - m)) return false;
  }
  return true;
}

double ScalarField::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.cell_volume();
}

ScalarField VectorField::magnitude() const {
  ScalarField out(grid);
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    out.values[n] = std::sqrt(components[0][n] * components[0][n] + components[1][n] * components[1][n] +
                              components[2][n] * components[2][n]);
  }
  return out;
}

}  // namespace mvp
