#include "mvp/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mvp/errors.hpp"

namespace mvp {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("truncated snapshot " + path);
  return v;
}

void write_header(std::ofstream& out, const GridSpec& g, std::uint32_t ncomp, double time) {
  out.write("MVPS", 4);
  put(out, kSnapshotVersion);
  for (std::size_t n : g.cells) put(out, static_cast<std::uint32_t>(n));
  put(out, ncomp);
  for (double o : g.origin) put(out, o);
  for (double e : g.extent) put(out, e);
  put(out, time);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write snapshot " + path);
  return out;
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& f, double time) {
  auto out = open_out(path);
  write_header(out, f.grid, 1, time);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw Error("failed writing snapshot " + path);
}

void write_snapshot(const std::string& path, const VectorField& f, double time) {
  auto out = open_out(path);
  write_header(out, f.grid, 3, time);
  for (const auto& c : f.components) {
    out.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing snapshot " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "MVPS", 4) != 0) throw Error("not a snapshot file: " + path);
  const auto version = get<std::uint32_t>(in, path);
  if (version != kSnapshotVersion) throw Error("unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  for (auto& n : s.grid.cells) n = get<std::uint32_t>(in, path);
  s.components = get<std::uint32_t>(in, path);
  if (s.components != 1 && s.components != 3) throw Error("bad component count in " + path);
  for (auto& o : s.grid.origin) o = get<double>(in, path);
  for (auto& e : s.grid.extent) e = get<double>(in, path);
  s.time = get<double>(in, path);
  s.grid.validate();
  s.data.resize(s.grid.size() * s.components);
  if (!in.read(reinterpret_cast<char*>(s.data.data()), static_cast<std::streamsize>(s.data.size() * sizeof(double)))) {
    throw Error("truncated snapshot " + path);
  }
  return s;
}

ScalarField Snapshot::scalar() const {
  if (components != 1) throw Error("snapshot holds a vector field");
  ScalarField f(grid);
  f.values = data;
  return f;
}

VectorField Snapshot::vector() const {
  if (components != 3) throw Error("snapshot holds a scalar field");
  VectorField f(grid);
  const std::size_t n = grid.size();
  for (int c = 0; c < 3; ++c) {
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(c * n), data.begin() + static_cast<std::ptrdiff_t>((c + 1) * n),
              f.components[c].begin());
  }
  return f;
}

}  // namespace mvp
