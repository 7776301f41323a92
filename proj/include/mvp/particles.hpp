#pragma once

#include <cstddef>
#include <vector>

#include "mvp/vec3.hpp"

namespace mvp {

// N weighted phase-space markers carrying f. `tags` optionally holds the
// value f_in(x_i(0), v_i(0)) of the initial density at each marker; it is
// constant along characteristics and is never touched by the integrator.
struct ParticleEnsemble {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<double> weights;
  std::vector<double> tags;

  std::size_t size() const { return positions.size(); }
  // Throws std::invalid_argument on length mismatch, negative weight or
  // non-finite entries.
  void validate() const;
  double total_mass() const;
};

}  // namespace mvp
