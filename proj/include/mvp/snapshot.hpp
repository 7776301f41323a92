#pragma once

// Binary field snapshots. Layout, all little-endian:
//   char[4]  "MVPS"
//   u32      version (1)
//   u32[3]   cells per axis
//   u32      components (1 for scalar, 3 for vector fields)
//   f64[3]   origin
//   f64[3]   extent
//   f64      time
//   f64[]    cell data, row-major with the last axis fastest; vector fields
//            store all of component 0, then 1, then 2.

#include <cstdint>
#include <string>
#include <vector>

#include "mvp/grid.hpp"

namespace mvp {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  GridSpec grid;
  std::uint32_t components = 1;
  double time = 0.0;
  std::vector<double> data;

  ScalarField scalar() const;
  VectorField vector() const;
};

void write_snapshot(const std::string& path, const ScalarField& f, double time);
void write_snapshot(const std::string& path, const VectorField& f, double time);
// Throws mvp::Error on a bad magic number, unknown version or truncated file.
Snapshot read_snapshot(const std::string& path);

}  // namespace mvp
