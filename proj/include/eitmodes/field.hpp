#pragma once

// Complex transverse field on an N x N Cartesian grid.
//
// Sample (ix, iy) sits at x = -extent + ix * dx, y = -extent + iy * dx with
// dx = 2 extent / N, so the grid centre (N/2, N/2) is the origin. `center_*`
// is the beam axis in the same coordinates (default: origin).
//
// On-disk format (little-endian):
//   <stem>.bin   uint32 N | float64 extent_m | N*N x (float32 re, float32 im),
//                row-major with y outer and x inner
//   <stem>.json  header: {"format": "eitmodes-field", "version": 1, "n", "extent_m",
//                "center_x_m", "center_y_m", "dtype": "complex64", "byte_order": "little"}

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eitmodes/error.hpp"

namespace eit {

using Complex = std::complex<double>;

struct Field2D {
  std::size_t n = 0;
  double extent_m = 0.0;  // half-width
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  std::vector<Complex> values;

  static Field2D zeros(std::size_t n, double extent_m) {
    require(n >= 2 && std::has_single_bit(n), ErrorCode::InvalidArgument,
            "field grid size must be a power of two");
    require(extent_m > 0.0 && std::isfinite(extent_m), ErrorCode::InvalidArgument,
            "field extent must be positive");
    Field2D f;
    f.n = n;
    f.extent_m = extent_m;
    f.values.assign(n * n, Complex{});
    return f;
  }

  /// Field from f(x, y) with x, y measured from the beam axis.
  template <class Fn>
  static Field2D from_function(std::size_t n, double extent_m, Fn&& fn) {
    auto f = zeros(n, extent_m);
    for (std::size_t iy = 0; iy < n; ++iy) {
      for (std::size_t ix = 0; ix < n; ++ix) {
        f.at(ix, iy) = fn(f.coordinate(ix) - f.center_x_m, f.coordinate(iy) - f.center_y_m);
      }
    }
    return f;
  }

  double dx() const { return 2.0 * extent_m / static_cast<double>(n); }
  double coordinate(std::size_t i) const { return -extent_m + static_cast<double>(i) * dx(); }

  Complex& at(std::size_t ix, std::size_t iy) { return values[iy * n + ix]; }
  const Complex& at(std::size_t ix, std::size_t iy) const { return values[iy * n + ix]; }

  /// Integral of |E|^2 over the grid.
  double power() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * dx() * dx();
  }

  /// Radius of the largest axis-centred circle inside the grid.
  double inscribed_radius() const {
    return std::min(extent_m - std::abs(center_x_m), extent_m - std::abs(center_y_m));
  }

  /// Bilinear sample at absolute coordinates; zero outside the grid.
  Complex sample(double x, double y) const {
    const double h = dx();
    const double sx = (x + extent_m) / h;
    const double sy = (y + extent_m) / h;
    if (sx < 0.0 || sy < 0.0) return {};
    const auto ix = static_cast<std::size_t>(sx);
    const auto iy = static_cast<std::size_t>(sy);
    if (ix + 1 >= n || iy + 1 >= n) return {};
    const double wx = sx - static_cast<double>(ix);
    const double wy = sy - static_cast<double>(iy);
    return (1 - wy) * ((1 - wx) * at(ix, iy) + wx * at(ix + 1, iy)) +
           wy * ((1 - wx) * at(ix, iy + 1) + wx * at(ix + 1, iy + 1));
  }
};

/// Relative L2 distance ||a - b|| / ||b|| on a shared grid.
inline double relative_l2(const Field2D& a, const Field2D& b) {
  require(a.n == b.n && a.extent_m == b.extent_m, ErrorCode::InvalidArgument,
          "fields live on different grids");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Binary I/O

namespace detail {

template <class T>
void write_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) fail(ErrorCode::Format, "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline std::filesystem::path with_extension(std::filesystem::path p, const char* ext) {
  return p.replace_extension(ext);
}

}  // namespace detail

inline nlohmann::json field_header(const Field2D& f) {
  return {{"format", "eitmodes-field"}, {"version", 1},          {"n", f.n},
          {"extent_m", f.extent_m},     {"center_x_m", f.center_x_m}, {"center_y_m", f.center_y_m},
          {"dtype", "complex64"},       {"byte_order", "little"},
          {"layout", "row-major, y outer, x inner; x_i = -extent_m + i * 2 extent_m / n"}};
}

/// Writes <stem>.bin and <stem>.json.
inline void write_field(const std::filesystem::path& stem, const Field2D& f) {
  const auto bin = detail::with_extension(stem, ".bin");
  std::ofstream os(bin, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Format, "cannot open " + bin.string());
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(f.n));
  detail::write_le<double>(os, f.extent_m);
  for (const auto& v : f.values) {
    detail::write_le<float>(os, static_cast<float>(v.real()));
    detail::write_le<float>(os, static_cast<float>(v.imag()));
  }
  require(static_cast<bool>(os), ErrorCode::Format, "write failed for " + bin.string());
  std::ofstream js(detail::with_extension(stem, ".json"));
  js << field_header(f).dump(2) << '\n';
}

/// Reads <stem>.bin; the .json header, when present, supplies the beam axis
/// and must agree with the binary on n and extent.
inline Field2D read_field(const std::filesystem::path& path) {
  const auto bin = detail::with_extension(path, ".bin");
  std::ifstream is(bin, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Format, "cannot open field file " + bin.string());
  const auto n = detail::read_le<std::uint32_t>(is);
  const auto extent = detail::read_le<double>(is);
  require(n >= 2 && n <= (1u << 15), ErrorCode::Format, "implausible field size in " + bin.string());
  Field2D f;
  try {
    f = Field2D::zeros(n, extent);
  } catch (const Error& e) {
    fail(ErrorCode::Format, std::string("bad field header: ") + e.what());
  }
  for (auto& v : f.values) {
    const float re = detail::read_le<float>(is);
    const float im = detail::read_le<float>(is);
    v = Complex(re, im);
  }
  is.peek();
  require(is.eof(), ErrorCode::Format, "trailing bytes in " + bin.string());

  const auto hdr_path = detail::with_extension(path, ".json");
  if (std::filesystem::exists(hdr_path)) {
    nlohmann::json hdr;
    try {
      std::ifstream hs(hdr_path);
      hdr = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::Format, "bad field header " + hdr_path.string() + ": " + e.what());
    }
    require(hdr.value("n", std::size_t{0}) == f.n && hdr.value("extent_m", 0.0) == f.extent_m,
            ErrorCode::Format, "field header disagrees with binary: " + hdr_path.string());
    f.center_x_m = hdr.value("center_x_m", 0.0);
    f.center_y_m = hdr.value("center_y_m", 0.0);
  }
  return f;
}

}  // namespace eit
