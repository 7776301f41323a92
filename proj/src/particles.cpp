#include "mvp/particles.hpp"

#include <cmath>
#include <stdexcept>

namespace mvp {

void ParticleEnsemble::validate() const {
  const std::size_t n = positions.size();
  if (velocities.size() != n || weights.size() != n || (!tags.empty() && tags.size() != n)) {
    throw std::invalid_argument("ensemble arrays have mismatched lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("particle " + std::to_string(i) + " has a negative or non-finite weight");
    }
    for (int a = 0; a < 3; ++a) {
      if (!std::isfinite(positions[i][a]) || !std::isfinite(velocities[i][a])) {
        throw std::invalid_argument("particle " + std::to_string(i) + " has a non-finite coordinate");
      }
    }
  }
}

// Neumaier summation: n copies of 1/n add up to exactly 1 for the sizes in use.
double ParticleEnsemble::total_mass() const {
  double sum = 0.0, comp = 0.0;
  for (double w : weights) {
    const double t = sum + w;
    comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace mvp
