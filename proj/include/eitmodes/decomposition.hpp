#pragma once

// Expansion of a transverse field in the bound modes psi_mn(r) e^{i m theta}.
//
// Power convention: with f_m(r) = (1/2pi) \int E e^{-i m theta} d theta,
// (1/2pi) \iint |E|^2 dx dy = sum_m \int r |f_m|^2 dr, and a mode coefficient
// is c_mn = \int r f_m psi_mn dr. The real radial basis is orthonormal with
// weight r, so sum |c|^2 plus the residual equals the input power measured in
// these units.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eitmodes/error.hpp"
#include "eitmodes/field.hpp"
#include "eitmodes/physics.hpp"
#include "eitmodes/radial_solver.hpp"

namespace eit {

/// Azimuthal harmonic f_m sampled on rings r_k = (k + 1/2) spacing.
struct RadialProfile {
  int m = 0;
  double spacing_m = 0.0;
  std::vector<Complex> values;

  double radius(std::size_t k) const { return (static_cast<double>(k) + 0.5) * spacing_m; }
  double outer_radius() const { return static_cast<double>(values.size()) * spacing_m; }

  /// Linear interpolation between rings, linear extrapolation inside the
  /// first ring, zero beyond the last.
  Complex value_at(double r) const {
    if (values.empty() || r >= outer_radius()) return {};
    if (values.size() == 1) return values[0];
    double s = r / spacing_m - 0.5;
    std::size_t k = s < 0.0 ? 0 : static_cast<std::size_t>(s);
    k = std::min(k, values.size() - 2);
    const double w = s - static_cast<double>(k);
    return (1.0 - w) * values[k] + w * values[k + 1];
  }

  /// \int r |f|^2 dr over the rings.
  double power() const {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) s += radius(k) * std::norm(values[k]);
    return s * spacing_m;
  }
};

struct AzimuthalSplit {
  int m_max = 0;
  std::size_t azimuth_samples = 0;
  double spacing_m = 0.0;
  std::vector<RadialProfile> channels;   // m = -m_max .. m_max
  std::vector<double> ring_mean_intensity;  // (1/M) sum_l |E(r_k, theta_l)|^2
  double cartesian_power = 0.0;          // \iint |E|^2 dx dy

  const RadialProfile& channel(int m) const {
    require(std::abs(m) <= m_max, ErrorCode::InvalidArgument, "channel outside split range");
    return channels[static_cast<std::size_t>(m + m_max)];
  }

  /// 2 pi \int r <|E|^2>_theta dr from the ring samples.
  double ring_power() const {
    double s = 0.0;
    for (std::size_t k = 0; k < ring_mean_intensity.size(); ++k) {
      s += (static_cast<double>(k) + 0.5) * spacing_m * ring_mean_intensity[k];
    }
    return 2.0 * std::numbers::pi * s * spacing_m;
  }
};

inline std::size_t azimuth_sample_count(int m_max) {
  return static_cast<std::size_t>(std::max(64, 8 * m_max));
}

/// Power fraction of the field lying outside the inscribed axis-centred circle.
inline double off_axis_fraction(const Field2D& field) {
  const double r_in = field.inscribed_radius();
  double outside = 0.0, total = 0.0;
  for (std::size_t iy = 0; iy < field.n; ++iy) {
    const double y = field.coordinate(iy) - field.center_y_m;
    for (std::size_t ix = 0; ix < field.n; ++ix) {
      const double x = field.coordinate(ix) - field.center_x_m;
      const double p = std::norm(field.at(ix, iy));
      total += p;
      if (x * x + y * y > r_in * r_in) outside += p;
    }
  }
  return total > 0.0 ? outside / total : 0.0;
}

/// Polar resampling (bilinear, N/2 rings out to the inscribed circle) and a
/// discrete azimuthal Fourier transform per ring.
inline AzimuthalSplit azimuthal_split(const Field2D& field, int m_max) {
  require(m_max >= 0, ErrorCode::InvalidArgument, "m_max must be >= 0");
  require(field.n >= 2 && field.values.size() == field.n * field.n, ErrorCode::InvalidArgument,
          "malformed field");
  const double power = field.power();
  require(power > 0.0 && std::isfinite(power), ErrorCode::InvalidArgument,
          "field power must be finite and nonzero");
  const double outside = off_axis_fraction(field);
  if (outside > 0.05) {
    fail(ErrorCode::OffAxisField, std::to_string(100.0 * outside) +
                                      "% of the power lies outside the inscribed circle");
  }

  AzimuthalSplit out;
  out.m_max = m_max;
  out.azimuth_samples = azimuth_sample_count(m_max);
  const std::size_t rings = field.n / 2;
  out.spacing_m = field.inscribed_radius() / static_cast<double>(rings);
  out.cartesian_power = power;
  out.ring_mean_intensity.assign(rings, 0.0);
  for (int m = -m_max; m <= m_max; ++m) {
    out.channels.push_back({m, out.spacing_m, std::vector<Complex>(rings)});
  }

  const std::size_t M = out.azimuth_samples;
  std::vector<Complex> ring(M);
  std::vector<Complex> twiddle(M);
  for (std::size_t l = 0; l < M; ++l) {
    twiddle[l] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(M));
  }
  for (std::size_t k = 0; k < rings; ++k) {
    const double r = (static_cast<double>(k) + 0.5) * out.spacing_m;
    double mean = 0.0;
    for (std::size_t l = 0; l < M; ++l) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(l) / static_cast<double>(M);
      ring[l] = field.sample(field.center_x_m + r * std::cos(theta),
                             field.center_y_m + r * std::sin(theta));
      mean += std::norm(ring[l]);
    }
    out.ring_mean_intensity[k] = mean / static_cast<double>(M);
    for (int m = -m_max; m <= m_max; ++m) {
      Complex acc{};
      for (std::size_t l = 0; l < M; ++l) {
        const auto idx = static_cast<std::size_t>(
            ((static_cast<long long>(m) * static_cast<long long>(l)) % static_cast<long long>(M) +
             static_cast<long long>(M)) % static_cast<long long>(M));
        acc += ring[l] * twiddle[idx];
      }
      out.channels[static_cast<std::size_t>(m + m_max)].values[k] = acc / static_cast<double>(M);
    }
  }
  return out;
}

struct Projection {
  std::vector<Complex> coefficients;  // per mode, in order
  double channel_power = 0.0;
  double residual = 0.0;
};

namespace detail {

inline void check_basis(std::span<const TransverseMode> modes) {
  require(!modes.empty(), ErrorCode::BasisMismatch, "empty mode basis");
  for (const auto& mode : modes) {
    require(mode.m == modes[0].m && mode.delta == modes[0].delta &&
                mode.grid.same_discretisation(modes[0].grid),
            ErrorCode::BasisMismatch, "modes differ in m, delta or grid");
  }
}

}  // namespace detail

/// Coefficients of one azimuthal channel on a basis of equal (m, delta, grid).
inline Projection project(const RadialProfile& profile, std::span<const TransverseMode> modes) {
  detail::check_basis(modes);
  require(profile.m == modes[0].m, ErrorCode::BasisMismatch,
          "profile channel m=" + std::to_string(profile.m) + " but basis m=" +
              std::to_string(modes[0].m));
  const auto& grid = modes[0].grid;
  std::vector<Complex> f(grid.n_points);
  double power = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    f[j] = profile.value_at(grid.node(j));
    power += grid.node(j) * std::norm(f[j]);
  }
  power *= grid.dr;
  for (std::size_t k = 0; k < profile.values.size(); ++k) {
    if (profile.radius(k) >= grid.radius()) {
      power += profile.radius(k) * std::norm(profile.values[k]) * profile.spacing_m;
    }
  }
  Projection out;
  out.channel_power = power;
  double captured = 0.0;
  for (const auto& mode : modes) {
    Complex c{};
    for (std::size_t j = 0; j < grid.n_points; ++j) c += grid.node(j) * f[j] * mode.psi[j];
    c *= grid.dr;
    captured += std::norm(c);
    out.coefficients.push_back(c);
  }
  out.residual = power - captured;
  return out;
}

struct ExpansionTerm {
  int m;
  int n;
  Complex coefficient;
};

struct ModeExpansion {
  std::vector<ExpansionTerm> terms;
  double residual_power_fraction = 0.0;
  double input_power = 0.0;  // (1/2pi) \iint |E|^2
  Detuning delta{0.0};
  double k0 = 0.0;
  std::string config_hash;
  std::vector<TransverseMode> basis;
  // output grid for synthesis
  std::size_t n = 0;
  double extent_m = 0.0;
  double center_x_m = 0.0;
  double center_y_m = 0.0;

  double captured_power() const {
    double s = 0.0;
    for (const auto& t : terms) s += std::norm(t.coefficient);
    return s;
  }
};

/// Longitudinal wavevector mismatch Delta = delta / c - beta / (2 k0), m^-1.
inline double longitudinal_mismatch(Detuning delta, double beta, double k0) {
  return delta.value() / kSpeedOfLight - beta / (2.0 * k0);
}

struct DecomposeOptions {
  std::optional<std::size_t> n_points;
  std::optional<double> radius_m;
};

inline ModeExpansion decompose(const Field2D& field, const MediumBeamConfig& config, Detuning delta,
                               int m_max, int n_max, const DecomposeOptions& options = {}) {
  require(delta.is_negative(), ErrorCode::NotNegativeDetuning, "decomposition needs delta < 0");
  require(n_max >= 1, ErrorCode::InvalidArgument, "n_max must be >= 1");
  const auto split = azimuthal_split(field, m_max);
  const double radius = options.radius_m ? *options.radius_m
                                         : auto_truncation_radius(config, delta, n_max, m_max);
  ModeExpansion ex;
  ex.delta = delta;
  ex.k0 = wavenumber(config);
  ex.config_hash = config_fingerprint(config);
  ex.input_power = split.cartesian_power / (2.0 * std::numbers::pi);
  ex.n = field.n;
  ex.extent_m = field.extent_m;
  ex.center_x_m = field.center_x_m;
  ex.center_y_m = field.center_y_m;
  for (int m = -m_max; m <= m_max; ++m) {
    const auto grid = RadialGrid::make(options.n_points.value_or(kDefaultGridPoints), radius, m);
    auto spectrum = solve_channel(config, delta, grid, n_max);
    const auto proj = project(split.channel(m), spectrum.modes);
    for (std::size_t i = 0; i < spectrum.modes.size(); ++i) {
      ex.terms.push_back({m, spectrum.modes[i].n, proj.coefficients[i]});
    }
    for (auto& mode : spectrum.modes) ex.basis.push_back(std::move(mode));
  }
  ex.residual_power_fraction = (ex.input_power - ex.captured_power()) / ex.input_power;
  return ex;
}

/// Sum of c psi_mn(r) e^{i m theta} e^{i Delta_mn z} on the expansion's grid.
inline Field2D synthesize(const ModeExpansion& expansion, double z_m) {
  struct Resolved {
    const TransverseMode* mode;
    Complex weight;
  };
  std::vector<Resolved> parts;
  for (const auto& term : expansion.terms) {
    const auto it = std::find_if(expansion.basis.begin(), expansion.basis.end(),
                                 [&](const TransverseMode& b) { return b.m == term.m && b.n == term.n; });
    if (it == expansion.basis.end()) {
      fail(ErrorCode::BasisMismatch, "no basis mode for term (m=" + std::to_string(term.m) +
                                         ", n=" + std::to_string(term.n) + ")");
    }
    require(it->delta == expansion.delta, ErrorCode::BasisMismatch,
            "basis mode computed at a different detuning");
    const double phase = longitudinal_mismatch(expansion.delta, it->beta, expansion.k0) * z_m;
    parts.push_back({&*it, term.coefficient * std::polar(1.0, phase)});
  }
  auto out = Field2D::zeros(expansion.n, expansion.extent_m);
  out.center_x_m = expansion.center_x_m;
  out.center_y_m = expansion.center_y_m;
  for (std::size_t iy = 0; iy < out.n; ++iy) {
    const double y = out.coordinate(iy) - out.center_y_m;
    for (std::size_t ix = 0; ix < out.n; ++ix) {
      const double x = out.coordinate(ix) - out.center_x_m;
      const double r = std::hypot(x, y);
      const double theta = std::atan2(y, x);
      Complex acc{};
      for (const auto& p : parts) {
        const double radial = p.mode->value_at(r);
        if (radial == 0.0) continue;
        acc += p.weight * radial * std::polar(1.0, p.mode->m * theta);
      }
      out.at(ix, iy) = acc;
    }
  }
  return out;
}

}  // namespace eit
