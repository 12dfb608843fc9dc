#pragma once

// Dispersion relation beta_mn(delta) and group velocities
//
//   V_g = c / (1 - (c / 2k0) d beta / d delta).
//
// The slope comes from Hellmann-Feynman (delta enters the operator linearly
// through V), with a central finite difference kept as an independent column.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eitmodes/error.hpp"
#include "eitmodes/physics.hpp"
#include "eitmodes/radial_solver.hpp"

namespace eit {

struct Channel {
  int m = 0;
  int n = 1;
  friend auto operator<=>(const Channel&, const Channel&) = default;
};

struct DispersionRow {
  double delta_s;
  Channel channel;
  double beta_m2;
  double slope_hf;  // d beta / d delta, m^-2 s
  double slope_fd;
  double vg_mps;
};

struct DispersionTable {
  std::vector<Channel> channels;
  std::vector<double> deltas;       // s^-1
  std::vector<DispersionRow> rows;  // delta-major: rows[i * channels.size() + k]

  const DispersionRow& at(std::size_t delta_index, std::size_t channel_index) const {
    return rows.at(delta_index * channels.size() + channel_index);
  }
};

struct SweepOptions {
  std::optional<std::size_t> n_points;
  std::optional<double> radius_m;
  double fd_relative_step = 1e-3;
};

/// d beta / d delta = -integral r psi^2 2 k0 g^2 N / (c Omega^2) dr, evaluated
/// with the config's profile on the mode's grid. Always negative.
inline double hellmann_feynman_slope(const TransverseMode& mode, const MediumBeamConfig& config) {
  double s = 0.0;
  for (std::size_t j = 0; j < mode.psi.size(); ++j) {
    const double r = mode.grid.node(j);
    s += r * mode.psi[j] * mode.psi[j] * detuning_coupling(config, r);
  }
  return -s * mode.grid.dr;
}

inline double group_velocity(double slope, const MediumBeamConfig& config) {
  require(!(slope > 0.0), ErrorCode::NonNegativeSlope,
          "d beta / d delta must be <= 0, got " + std::to_string(slope));
  return kSpeedOfLight / (1.0 - kSpeedOfLight / (2.0 * wavenumber(config)) * slope);
}

/// `steps` detunings from delta_min to delta_max (both negative), evenly
/// spaced in log|delta|, ordered by increasing |delta|.
inline std::vector<double> detuning_grid(double delta_min, double delta_max, std::size_t steps) {
  require(delta_min < 0.0 && delta_max < 0.0, ErrorCode::NotNegativeDetuning,
          "detuning range must be negative");
  require(steps >= 1, ErrorCode::InvalidArgument, "need at least one detuning");
  const double lo = std::log(std::min(-delta_min, -delta_max));
  const double hi = std::log(std::max(-delta_min, -delta_max));
  std::vector<double> out(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    out[i] = -std::exp(lo + t * (hi - lo));
  }
  // exact endpoints rather than exp(log(.))
  out.front() = -std::min(-delta_min, -delta_max);
  if (steps > 1) out.back() = -std::max(-delta_min, -delta_max);
  return out;
}

namespace detail {

inline std::string describe(const Channel& c, double delta) {
  return "(m=" + std::to_string(c.m) + ", n=" + std::to_string(c.n) +
         ", delta=" + std::to_string(delta) + " s^-1)";
}

/// The (m, n) mode of a solved channel, matched by node count n - 1.
inline const TransverseMode& find_by_nodes(const Spectrum& spectrum, const Channel& c, double delta) {
  for (const auto& mode : spectrum.modes) {
    if (mode.nodes == c.n - 1) return mode;
  }
  fail(ErrorCode::TruncationFailed, "mode not bound below the truncation barrier " + describe(c, delta));
}

}  // namespace detail

inline DispersionTable sweep(std::span<const Channel> channels, std::span<const double> deltas,
                             const MediumBeamConfig& config, const SweepOptions& options = {}) {
  require(!channels.empty(), ErrorCode::InvalidArgument, "channel list is empty");
  require(!deltas.empty(), ErrorCode::InvalidArgument, "detuning grid is empty");
  for (const auto& c : channels) {
    require(c.n >= 1, ErrorCode::InvalidArgument, "radial index n must be >= 1");
  }
  for (double d : deltas) {
    require(d < 0.0, ErrorCode::NotNegativeDetuning,
            "dispersion sweep needs delta < 0, got " + std::to_string(d));
  }

  std::map<int, int> n_needed;  // m -> highest n requested
  int n_max = 1, max_abs_m = 0;
  for (const auto& c : channels) {
    n_needed[c.m] = std::max(n_needed[c.m], c.n);
    n_max = std::max(n_max, c.n);
    max_abs_m = std::max(max_abs_m, std::abs(c.m));
  }

  DispersionTable table;
  table.channels.assign(channels.begin(), channels.end());
  table.deltas.assign(deltas.begin(), deltas.end());
  table.rows.reserve(deltas.size() * channels.size());

  for (double delta_value : deltas) {
    const Detuning delta{delta_value};
    const double step = options.fd_relative_step * std::abs(delta_value);
    try {
      const double radius = options.radius_m
                                ? *options.radius_m
                                : auto_truncation_radius(config, delta, n_max, max_abs_m);
      std::map<int, Spectrum> centre, plus, minus;
      for (const auto& [m, n_top] : n_needed) {
        const auto grid = RadialGrid::make(options.n_points.value_or(kDefaultGridPoints), radius, m);
        centre[m] = solve_channel(config, delta, grid, n_top);
        plus[m] = solve_channel(config, Detuning{delta_value + step}, grid, n_top);
        minus[m] = solve_channel(config, Detuning{delta_value - step}, grid, n_top);
      }
      for (const auto& c : channels) {
        const auto& mode = detail::find_by_nodes(centre[c.m], c, delta_value);
        const double beta_plus = detail::find_by_nodes(plus[c.m], c, delta_value).beta;
        const double beta_minus = detail::find_by_nodes(minus[c.m], c, delta_value).beta;
        const double slope_hf = hellmann_feynman_slope(mode, config);
        const double slope_fd = (beta_plus - beta_minus) / (2.0 * step);
        table.rows.push_back({delta_value, c, mode.beta, slope_hf, slope_fd,
                              group_velocity(slope_hf, config)});
      }
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " [sweep at delta=" +
                                std::to_string(delta_value) + " s^-1]");
    }
  }
  return table;
}

struct BeamSizePoint {
  double beam_radius_m;
  double vg_mps;
};

/// Group velocity of one mode as the Gaussian control width a is varied.
inline std::vector<BeamSizePoint> beam_size_asymptotics(const Channel& channel, Detuning delta,
                                                        std::span<const double> a_grid,
                                                        const MediumBeamConfig& config,
                                                        const SweepOptions& options = {}) {
  require(delta.is_negative(), ErrorCode::NotNegativeDetuning, "beam-size scan needs delta < 0");
  require(!a_grid.empty(), ErrorCode::InvalidArgument, "beam radius grid is empty");
  require(std::is_sorted(a_grid.begin(), a_grid.end()), ErrorCode::InvalidArgument,
          "beam radius grid must be ascending");
  std::vector<BeamSizePoint> out;
  for (double a : a_grid) {
    const auto cfg = config.with_beam_radius(a);
    const double radius = auto_truncation_radius(cfg, delta, channel.n, std::abs(channel.m));
    const auto grid =
        RadialGrid::make(options.n_points.value_or(kDefaultGridPoints), radius, channel.m);
    const auto spectrum = solve_channel(cfg, delta, grid, channel.n);
    const auto& mode = detail::find_by_nodes(spectrum, channel, delta.value());
    out.push_back({a, group_velocity(hellmann_feynman_slope(mode, cfg), cfg)});
  }
  return out;
}

}  // namespace eit
