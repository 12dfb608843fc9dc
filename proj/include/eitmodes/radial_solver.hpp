#pragma once

// Bound transverse modes of the radial eigenproblem
//
//   -psi'' - psi'/r + [m^2/r^2 + V(r)] psi = beta psi,   psi(inf) = 0,
//
// per orbital channel m. The operator -(1/r)(r psi')' is discretised by finite
// volumes on cell centres r_j = (j - 1/2) dr with zero flux through the r = 0
// face (the regular solution for every m) and psi = 0 on the outer face
// R = n dr. Scaling by sqrt(r_j) (u = sqrt(r) psi) makes the matrix symmetric
// tridiagonal, so the lowest levels come from Sturm bisection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eitmodes/error.hpp"
#include "eitmodes/physics.hpp"
#include "eitmodes/tridiagonal.hpp"

namespace eit {

inline constexpr std::size_t kDefaultGridPoints = 4000;
inline constexpr std::size_t kMinGridPoints = 200;

struct RadialGrid {
  std::size_t n_points = kDefaultGridPoints;
  double dr = 0.0;  // m
  int m_channel = 0;

  static RadialGrid make(std::size_t n_points, double radius_m, int m) {
    require(n_points >= kMinGridPoints, ErrorCode::InvalidArgument,
            "radial grid needs at least " + std::to_string(kMinGridPoints) + " points");
    require(radius_m > 0.0 && std::isfinite(radius_m), ErrorCode::InvalidArgument,
            "truncation radius must be positive");
    return RadialGrid{n_points, radius_m / static_cast<double>(n_points), m};
  }

  double radius() const { return static_cast<double>(n_points) * dr; }
  /// Cell centre j = 0..n_points-1.
  double node(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dr; }

  std::vector<double> nodes() const {
    std::vector<double> r(n_points);
    for (std::size_t j = 0; j < n_points; ++j) r[j] = node(j);
    return r;
  }

  bool same_discretisation(const RadialGrid& other) const {
    return n_points == other.n_points && dr == other.dr;
  }
};

struct TransverseMode {
  int m = 0;
  int n = 1;           // radial index, >= 1
  double beta = 0.0;   // m^-2
  std::vector<double> psi;  // m^-1, sampled at grid.node(j)
  RadialGrid grid;
  int nodes = 0;
  Detuning delta{0.0};

  /// psi(r) by linear interpolation between cell centres; regular extension
  /// to r = 0 and psi(R) = 0 at the outer face.
  double value_at(double r_m) const {
    const double R = grid.radius();
    if (r_m < 0.0 || r_m >= R) return 0.0;
    const double s = r_m / grid.dr - 0.5;
    if (s < 0.0) {
      double origin = 0.0;
      if (m == 0 && psi.size() > 1) origin = (9.0 * psi[0] - psi[1]) / 8.0;
      const double w = r_m / grid.node(0);
      return (1.0 - w) * origin + w * psi[0];
    }
    const auto j = static_cast<std::size_t>(s);
    if (j + 1 >= psi.size()) {
      const double w = (r_m - grid.node(psi.size() - 1)) / (R - grid.node(psi.size() - 1));
      return (1.0 - w) * psi.back();
    }
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * psi[j] + w * psi[j + 1];
  }
};

struct SpectrumRequest {
  std::vector<int> m_list;
  int n_max = 3;
  Detuning delta{-1e6};
  std::optional<std::size_t> n_points;
  std::optional<double> radius_m;
};

struct DroppedMode {
  int m;
  int n;
  double beta;     // m^-2
  double barrier;  // V(R), m^-2
};

struct Spectrum {
  std::vector<TransverseMode> modes;  // grouped by m in request order, ascending beta
  std::vector<DroppedMode> dropped;
};

// ---------------------------------------------------------------------------
// Truncation radius

/// Harmonic-level estimate V0 + (2 n_max + |m|_max + 1) 2 sqrt(V0)/a.
inline double default_beta_guess(const MediumBeamConfig& config, Detuning delta, int n_max,
                                 int max_abs_m) {
  return well_floor(config, delta) +
         (2.0 * n_max + max_abs_m + 1.0) * harmonic_quantum(config, delta);
}

/// Smallest R <= 20a with V(R) >= 10 beta_guess, unclamped; nullopt if none.
inline std::optional<double> barrier_radius(const MediumBeamConfig& config, Detuning delta,
                                            double beta_guess) {
  require(delta.is_negative(), ErrorCode::NotNegativeDetuning,
          "truncation radius needs delta < 0");
  const double a = config.beam_radius_m;
  const double target = 10.0 * beta_guess;
  const double r_max = 20.0 * a;
  const double step = a / 32.0;
  auto reaches = [&](double r) { return potential(config, delta, r) >= target; };
  if (reaches(0.0)) return 0.0;
  double lo = 0.0;
  for (double hi = step; hi <= r_max + 0.5 * step; hi += step) {
    const double h = std::min(hi, r_max);
    if (reaches(h)) {
      double lo_b = lo, hi_b = h;
      for (int it = 0; it < 80 && hi_b - lo_b > 1e-12 * a; ++it) {
        const double mid = 0.5 * (lo_b + hi_b);
        (reaches(mid) ? hi_b : lo_b) = mid;
      }
      return hi_b;
    }
    lo = h;
  }
  return std::nullopt;
}

/// Barrier radius clamped to [3a, 20a].
inline double auto_truncation_radius(const MediumBeamConfig& config, Detuning delta,
                                     double beta_guess) {
  const auto r = barrier_radius(config, delta, beta_guess);
  if (!r) {
    fail(ErrorCode::TruncationFailed,
         "potential never reaches 10x the eigenvalue estimate within 20 beam radii");
  }
  return std::clamp(*r, 3.0 * config.beam_radius_m, 20.0 * config.beam_radius_m);
}

inline double auto_truncation_radius(const MediumBeamConfig& config, Detuning delta, int n_max,
                                     int max_abs_m) {
  return auto_truncation_radius(config, delta,
                                default_beta_guess(config, delta, n_max, max_abs_m));
}

// ---------------------------------------------------------------------------
// Operator assembly

/// Symmetric tridiagonal operator for potential samples V(r_j) on the grid.
inline SymmetricTridiagonal assemble_operator(const RadialGrid& grid,
                                              std::span<const double> potential_m2) {
  const std::size_t n = grid.n_points;
  require(potential_m2.size() == n, ErrorCode::InvalidArgument, "potential sample count mismatch");
  const double h2 = grid.dr * grid.dr;
  const double m2 = static_cast<double>(grid.m_channel) * grid.m_channel;
  SymmetricTridiagonal t;
  t.diag.resize(n);
  t.off.resize(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = grid.node(j);
    t.diag[j] = 2.0 / h2 + m2 / (r * r) + potential_m2[j];
  }
  // psi = 0 on the outer face by odd reflection across R.
  const double r_last = grid.node(n - 1);
  const double face_in = r_last - 0.5 * grid.dr;
  const double face_out = r_last + 0.5 * grid.dr;
  t.diag[n - 1] += (face_in + 2.0 * face_out) / (r_last * h2) - 2.0 / h2;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double face = static_cast<double>(j + 1) * grid.dr;
    t.off[j] = -face / (h2 * std::sqrt(grid.node(j) * grid.node(j + 1)));
  }
  return t;
}

inline std::vector<double> sample_potential(const MediumBeamConfig& config, Detuning delta,
                                            const RadialGrid& grid) {
  std::vector<double> v(grid.n_points);
  for (std::size_t j = 0; j < grid.n_points; ++j) v[j] = potential(config, delta, grid.node(j));
  return v;
}

inline SymmetricTridiagonal assemble_operator(const MediumBeamConfig& config, Detuning delta,
                                              const RadialGrid& grid) {
  require(delta.is_negative(), ErrorCode::NotNegativeDetuning,
          "delta >= 0 has no localized spectrum");
  const auto v = sample_potential(config, delta, grid);
  return assemble_operator(grid, v);
}

// ---------------------------------------------------------------------------
// Mode post-processing

/// Integral of r f g dr on the grid (midpoint rule on cell centres).
inline double radial_inner(const RadialGrid& grid, std::span<const double> f,
                           std::span<const double> g) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += grid.node(j) * f[j] * g[j];
  return s * grid.dr;
}

inline double mode_overlap(const TransverseMode& a, const TransverseMode& b) {
  return radial_inner(a.grid, a.psi, b.psi);
}

/// Strict sign changes between consecutive samples, ignoring samples below
/// 1e-9 of the peak magnitude.
inline int count_nodes(std::span<const double> psi) {
  double peak = 0.0;
  for (double v : psi) peak = std::max(peak, std::abs(v));
  const double guard = 1e-9 * peak;
  int nodes = 0;
  int last_sign = 0;
  for (double v : psi) {
    if (std::abs(v) <= guard) continue;
    const int s = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && s != last_sign) ++nodes;
    last_sign = s;
  }
  return nodes;
}

/// Discrete Rayleigh quotient of psi samples for the assembled operator.
inline double rayleigh_quotient(const RadialGrid& grid, const SymmetricTridiagonal& op,
                                std::span<const double> psi) {
  std::vector<double> u(psi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) u[j] = std::sqrt(grid.node(j)) * psi[j];
  const auto au = op.apply(u);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    num += u[j] * au[j];
    den += u[j] * u[j];
  }
  return num / den;
}

namespace detail {

inline TransverseMode make_mode(const RadialGrid& grid, Detuning delta, int n, double beta,
                                std::span<const double> u) {
  TransverseMode mode;
  mode.m = grid.m_channel;
  mode.n = n;
  mode.beta = beta;
  mode.grid = grid;
  mode.delta = delta;
  mode.psi.resize(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) mode.psi[j] = u[j] / std::sqrt(grid.node(j));
  const double norm = std::sqrt(radial_inner(grid, mode.psi, mode.psi));
  double peak = 0.0;
  for (double v : mode.psi) peak = std::max(peak, std::abs(v));
  double sign = 1.0;
  for (double v : mode.psi) {
    if (std::abs(v) > 1e-9 * peak) {
      sign = v > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  for (double& v : mode.psi) v *= sign / norm;
  mode.nodes = count_nodes(mode.psi);
  return mode;
}

}  // namespace detail

/// Lowest n_max bound modes of one channel on a fixed grid.
inline Spectrum solve_channel(const MediumBeamConfig& config, Detuning delta,
                              const RadialGrid& grid, int n_max) {
  require(delta.is_negative(), ErrorCode::NotNegativeDetuning,
          "delta >= 0 has no localized spectrum (delta = " + std::to_string(delta.value()) + ")");
  require(n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  require(static_cast<std::size_t>(n_max) < grid.n_points, ErrorCode::InvalidArgument,
          "n_max exceeds grid size");
  config.validate();
  const auto op = assemble_operator(config, delta, grid);
  const double barrier = potential(config, delta, grid.radius());
  Spectrum out;
  std::vector<std::vector<double>> previous;
  for (int k = 0; k < n_max; ++k) {
    const double beta = kth_eigenvalue(op, static_cast<std::size_t>(k));
    if (!(beta < barrier)) {
      for (int rest = k; rest < n_max; ++rest) {
        out.dropped.push_back({grid.m_channel, rest + 1, rest == k ? beta : std::nan(""), barrier});
      }
      break;
    }
    auto u = inverse_iteration(op, beta, previous);
    auto mode = detail::make_mode(grid, delta, k + 1, beta, u);
    if (mode.nodes != k) {
      fail(ErrorCode::ConvergenceFailed,
           "mode (m=" + std::to_string(grid.m_channel) + ", n=" + std::to_string(k + 1) +
               ") has " + std::to_string(mode.nodes) + " nodes");
    }
    previous.push_back(std::move(u));
    out.modes.push_back(std::move(mode));
  }
  return out;
}

/// Grid used by solve_spectrum for one channel of a request.
inline RadialGrid spectrum_grid(const SpectrumRequest& request, const MediumBeamConfig& config,
                                int m) {
  int max_abs_m = 0;
  for (int mm : request.m_list) max_abs_m = std::max(max_abs_m, std::abs(mm));
  const double radius = request.radius_m
                            ? *request.radius_m
                            : auto_truncation_radius(config, request.delta, request.n_max, max_abs_m);
  return RadialGrid::make(request.n_points.value_or(kDefaultGridPoints), radius, m);
}

inline Spectrum solve_spectrum(const SpectrumRequest& request, const MediumBeamConfig& config) {
  require(request.delta.is_negative(), ErrorCode::NotNegativeDetuning,
          "delta >= 0 has no localized spectrum (delta = " +
              std::to_string(request.delta.value()) + ")");
  require(request.n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  require(!request.m_list.empty(), ErrorCode::InvalidArgument, "m list is empty");
  Spectrum out;
  for (int m : request.m_list) {
    auto part = solve_channel(config, request.delta, spectrum_grid(request, config, m), request.n_max);
    for (auto& mode : part.modes) out.modes.push_back(std::move(mode));
    for (auto& d : part.dropped) out.dropped.push_back(d);
  }
  return out;
}

}  // namespace eit
