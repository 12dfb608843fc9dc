#pragma once

// Physical parameters of the EIT medium and control beam, plus the scalar
// quantities derived from them. SI units throughout: lengths in m, rates in
// s^-1, the coupling density g^2 N in s^-2, transverse eigenvalues in m^-2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eitmodes/error.hpp"

namespace eit {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), slope_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    slope_[0] = secant[0];
    slope_[n - 1] = secant[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (secant[i - 1] * secant[i] <= 0.0) continue;
      // weighted harmonic mean keeps the interpolant monotone on each interval
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
      slope_[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
    }
    for (std::size_t i : {std::size_t{0}, n - 1}) {
      const double s = secant[i == 0 ? 0 : n - 2];
      if (slope_[i] * s <= 0.0) slope_[i] = 0.0;
      if (std::abs(slope_[i]) > 3.0 * std::abs(s)) slope_[i] = 3.0 * s;
    }
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * slope_[i + 1];
  }

 private:
  std::vector<double> x_, y_, slope_;
};

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// Probe detuning delta = omega_s - omega_02, in s^-1 (signed).
class Detuning {
 public:
  constexpr explicit Detuning(double value_per_s) : value_(value_per_s) {}
  constexpr double value() const { return value_; }
  constexpr bool is_negative() const { return value_ < 0.0; }
  friend constexpr bool operator==(Detuning, Detuning) = default;

 private:
  double value_;
};

/// Radial shape of the control Rabi frequency Omega(r).
///
/// Either the analytic Gaussian Omega0 exp(-r^2 / 2a^2) or a sampled table
/// (r_m, omega_s) evaluated by monotone cubic interpolation and
/// clamped to the last sample beyond the table.
class ControlProfile {
 public:
  enum class Kind { Gaussian, Table };

  static ControlProfile gaussian(double omega0_per_s, double beam_radius_m) {
    require(omega0_per_s > 0.0 && beam_radius_m > 0.0, ErrorCode::InvalidArgument,
            "gaussian profile needs omega0 > 0 and beam radius > 0");
    ControlProfile p;
    p.kind_ = Kind::Gaussian;
    p.omega0_ = omega0_per_s;
    p.radius_ = beam_radius_m;
    return p;
  }

  /// Table must start at r = 0, be strictly increasing in r, strictly positive
  /// in Omega and hold at least four rows.
  static ControlProfile table(std::vector<double> r_m, std::vector<double> omega_per_s) {
    require(r_m.size() == omega_per_s.size(), ErrorCode::InvalidArgument,
            "profile table columns differ in length");
    require(r_m.size() >= 4, ErrorCode::InvalidArgument, "profile table needs at least 4 rows");
    require(r_m.front() == 0.0, ErrorCode::InvalidArgument, "profile table must start at r = 0");
    for (std::size_t i = 0; i < r_m.size(); ++i) {
      require(omega_per_s[i] > 0.0 && std::isfinite(omega_per_s[i]), ErrorCode::InvalidArgument,
              "profile table values must be strictly positive");
      if (i > 0) {
        require(r_m[i] > r_m[i - 1], ErrorCode::InvalidArgument,
                "profile table radii must be strictly increasing");
      }
    }
    ControlProfile p;
    p.kind_ = Kind::Table;
    p.omega0_ = omega_per_s.front();
    p.radius_ = r_m.back();
    p.table_r_ = r_m;
    p.table_omega_ = omega_per_s;
    p.interp_ = std::make_shared<Interpolant>(std::move(r_m), std::move(omega_per_s));
    return p;
  }

  /// Spatially uniform profile Omega(r) = omega0, built as a flat table.
  static ControlProfile uniform(double omega0_per_s, double extent_m = 1.0) {
    return table({0.0, extent_m / 3, 2 * extent_m / 3, extent_m},
                 std::vector<double>(4, omega0_per_s));
  }

  Kind kind() const { return kind_; }
  double peak() const { return omega0_; }
  double gaussian_radius() const { return radius_; }
  const std::vector<double>& table_radii() const { return table_r_; }
  const std::vector<double>& table_values() const { return table_omega_; }

  /// Omega(r) in s^-1.
  double operator()(double r_m) const {
    if (kind_ == Kind::Gaussian) {
      return omega0_ * std::exp(-r_m * r_m / (2.0 * radius_ * radius_));
    }
    if (r_m >= table_r_.back()) return table_omega_.back();
    if (r_m <= 0.0) return table_omega_.front();
    return (*interp_)(r_m);
  }

 private:
  using Interpolant = MonotoneCubic;

  ControlProfile() = default;

  Kind kind_ = Kind::Gaussian;
  double omega0_ = 0.0;
  double radius_ = 0.0;
  std::vector<double> table_r_;
  std::vector<double> table_omega_;
  std::shared_ptr<const Interpolant> interp_;
};

struct MediumBeamConfig {
  double omega0_s;       // peak control Rabi frequency
  double beam_radius_m;  // control beam width a
  double g2N_s2;         // coupling density g^2 N
  double lambda0_m;      // probe transition wavelength
  ControlProfile profile;
  double omega_floor_fraction = 1e-12;

  static MediumBeamConfig gaussian(double omega0_s, double beam_radius_m, double g2N_s2,
                                   double lambda0_m) {
    MediumBeamConfig c{omega0_s, beam_radius_m, g2N_s2, lambda0_m,
                       ControlProfile::gaussian(omega0_s, beam_radius_m)};
    c.validate();
    return c;
  }

  /// Omega0 = 1e8 s^-1, a = 50 um, g^2 N = 1e22 s^-2, lambda = 780 nm.
  static MediumBeamConfig defaults() { return gaussian(1e8, 50e-6, 1e22, 780e-9); }

  /// Same medium with a different Gaussian beam width.
  MediumBeamConfig with_beam_radius(double a_m) const {
    require(profile.kind() == ControlProfile::Kind::Gaussian, ErrorCode::InvalidArgument,
            "beam radius can only be rescaled for the gaussian profile");
    return gaussian(omega0_s, a_m, g2N_s2, lambda0_m);
  }

  void validate() const {
    require(omega0_s > 0.0, ErrorCode::InvalidArgument, "omega0 must be > 0");
    require(beam_radius_m > 0.0, ErrorCode::InvalidArgument, "beam radius must be > 0");
    require(g2N_s2 >= 0.0, ErrorCode::InvalidArgument, "g2N must be >= 0");
    require(lambda0_m > 0.0, ErrorCode::InvalidArgument, "lambda0 must be > 0");
    require(omega_floor_fraction > 0.0 && omega_floor_fraction < 1.0, ErrorCode::InvalidArgument,
            "omega floor fraction must lie in (0, 1)");
    require(std::abs(profile(0.0) - omega0_s) <= 1e-12 * omega0_s, ErrorCode::InvalidArgument,
            "profile(0) must equal omega0");
  }
};

/// k0 = 2 pi / lambda0, in m^-1.
inline double wavenumber(const MediumBeamConfig& config) {
  return 2.0 * std::numbers::pi / config.lambda0_m;
}

/// -dV/d(delta) = 2 k0 g^2 N / (c Omega(r)^2), in m^-2 s. Throws ProfileZero
/// when Omega(r) drops below the configured floor.
inline double detuning_coupling(const MediumBeamConfig& config, double r_m) {
  const double omega = config.profile(r_m);
  if (!(omega >= config.omega_floor_fraction * config.omega0_s)) {
    fail(ErrorCode::ProfileZero, "control Rabi frequency below floor at r = " +
                                     std::to_string(r_m) + " m");
  }
  return 2.0 * wavenumber(config) * config.g2N_s2 / (kSpeedOfLight * omega * omega);
}

/// Effective transverse potential V(r) = -2 k0 g^2 N delta / (c Omega(r)^2), m^-2.
inline double potential(const MediumBeamConfig& config, Detuning delta, double r_m) {
  return -delta.value() * detuning_coupling(config, r_m);
}

/// Well floor V0 = V(0) evaluated with Omega = Omega0.
inline double well_floor(const MediumBeamConfig& config, Detuning delta) {
  return -2.0 * wavenumber(config) * config.g2N_s2 * delta.value() /
         (kSpeedOfLight * config.omega0_s * config.omega0_s);
}

/// Level spacing 2 sqrt(V0) / a of the harmonic approximation
/// V(r) ~ V0 (1 + r^2/a^2) of the Gaussian well.
inline double harmonic_quantum(const MediumBeamConfig& config, Detuning delta) {
  return 2.0 * std::sqrt(well_floor(config, delta)) / config.beam_radius_m;
}

/// Group velocity without transverse effects, c / (1 + g^2 N / Omega0^2).
inline double transverse_free_vg(const MediumBeamConfig& config) {
  return kSpeedOfLight / (1.0 + config.g2N_s2 / (config.omega0_s * config.omega0_s));
}

/// Stable 64-bit FNV-1a fingerprint of the physical parameters, as hex.
inline std::string config_fingerprint(const MediumBeamConfig& config) {
  std::vector<double> words{config.omega0_s, config.beam_radius_m, config.g2N_s2, config.lambda0_m,
                            config.omega_floor_fraction,
                            config.profile.kind() == ControlProfile::Kind::Gaussian ? 0.0 : 1.0};
  for (double r : config.profile.table_radii()) words.push_back(r);
  for (double w : config.profile.table_values()) words.push_back(w);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double w : words) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &w, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eit
