#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "vortexlab/grid.hpp"

namespace vortexlab {

// VXF1 field snapshot: magic "VXF1", u32 LE kind (0 scalar, 1 vector,
// 2 complex), u32 nx, u32 ny, f64 lx, f64 ly, then f64 LE row-major values.
// Vector fields are component-major (all X1, then all X2); complex fields
// interleave re, im per node.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

inline void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(u >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int k = 0; k < 8; ++k) u |= std::uint64_t(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void put_f64_array(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) put_f64(os, x);
}

inline void write_header(std::ostream& os, std::uint32_t kind, const Grid& g) {
  os.write("VXF1", 4);
  put_u32(os, kind);
  put_u32(os, static_cast<std::uint32_t>(g.nx));
  put_u32(os, static_cast<std::uint32_t>(g.ny));
  put_f64(os, g.lx);
  put_f64(os, g.ly);
}

}  // namespace detail

inline void write_vxf(std::ostream& os, const ScalarField& f) {
  detail::write_header(os, 0, f.grid);
  detail::put_f64_array(os, f.v);
}

inline void write_vxf(std::ostream& os, const VectorField& X) {
  detail::write_header(os, 1, X.grid);
  detail::put_f64_array(os, X.x);
  detail::put_f64_array(os, X.y);
}

inline void write_vxf(std::ostream& os, const ComplexField& u) {
  detail::write_header(os, 2, u.grid);
  for (std::size_t k = 0; k < u.re.size(); ++k) {
    detail::put_f64(os, u.re[k]);
    detail::put_f64(os, u.im[k]);
  }
}

using AnyField = std::variant<ScalarField, VectorField, ComplexField>;

inline AnyField read_vxf(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "VXF1", 4) != 0)
    throw std::runtime_error("not a VXF1 snapshot (bad magic)");
  const std::uint32_t kind = detail::get_u32(is);
  const std::uint32_t nx = detail::get_u32(is);
  const std::uint32_t ny = detail::get_u32(is);
  const double lx = detail::get_f64(is);
  const double ly = detail::get_f64(is);
  if (kind > 2) throw std::runtime_error("VXF1: unknown field kind");
  if (nx < 2 || ny < 2 || !(lx > 0.0) || !(ly > 0.0))
    throw std::runtime_error("VXF1: invalid grid header");
  Grid g(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
  if (kind == 0) {
    ScalarField f(g);
    for (auto& x : f.v) x = detail::get_f64(is);
    if (!is) throw std::runtime_error("VXF1: truncated scalar payload");
    return f;
  }
  if (kind == 1) {
    VectorField X(g);
    for (auto& x : X.x) x = detail::get_f64(is);
    for (auto& x : X.y) x = detail::get_f64(is);
    if (!is) throw std::runtime_error("VXF1: truncated vector payload");
    return X;
  }
  ComplexField u(g);
  for (std::size_t k = 0; k < u.re.size(); ++k) {
    u.re[k] = detail::get_f64(is);
    u.im[k] = detail::get_f64(is);
  }
  if (!is) throw std::runtime_error("VXF1: truncated complex payload");
  return u;
}

/// Writes atomically: to <path>.tmp first, then rename over the target.
template <class Field>
void save_vxf(const std::filesystem::path& path, const Field& f) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp + " for writing");
    write_vxf(os, f);
    if (!os) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline AnyField load_vxf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_vxf(is);
}

inline ScalarField load_scalar(const std::filesystem::path& path) {
  auto f = load_vxf(path);
  if (auto* s = std::get_if<ScalarField>(&f)) return std::move(*s);
  throw std::runtime_error(path.string() + ": expected a scalar field");
}

inline VectorField load_vector(const std::filesystem::path& path) {
  auto f = load_vxf(path);
  if (auto* s = std::get_if<VectorField>(&f)) return std::move(*s);
  throw std::runtime_error(path.string() + ": expected a vector field");
}

inline ComplexField load_complex(const std::filesystem::path& path) {
  auto f = load_vxf(path);
  if (auto* s = std::get_if<ComplexField>(&f)) return std::move(*s);
  throw std::runtime_error(path.string() + ": expected a complex field");
}

}  // namespace vortexlab
