#pragma once

// Split-step Fourier propagation of a monochromatic probe,
//
//   dE/dz = i [ lap_T / (2 k0) + delta / c + g^2 N delta / (c Omega(r)^2) ] E,
//
// on the Cartesian grid of a Field2D. Nothing here touches the radial
// eigensolver: the two only meet in tests, where they are compared.
//
// One step is Strang-split: kinetic half-step in Fourier space, potential
// full step in real space, kinetic half-step. A super-Gaussian (order 8)
// layer along the grid edge damps whatever reaches it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "eitmodes/error.hpp"
#include "eitmodes/field.hpp"
#include "eitmodes/physics.hpp"

namespace eit {

/// The evolution operator for one detuning.
struct StepEquation {
  MediumBeamConfig config;
  Detuning delta{0.0};
  double k0 = 0.0;

  /// Coefficient of lap_T in dE/dz, i.e. 1 / (2 k0).
  double diffraction_coefficient() const { return 1.0 / (2.0 * k0); }

  /// Real-space rate delta / c + g^2 N delta / (c Omega(r)^2), m^-1.
  double potential_rate(double r_m) const {
    const double d = delta.value();
    if (d == 0.0) return 0.0;
    const double omega = config.profile(r_m);
    require(omega > config.omega_floor_fraction * config.profile.peak(), ErrorCode::ProfileZero,
            "control field vanishes at r=" + std::to_string(r_m) + " m inside the propagation grid");
    return d / kSpeedOfLight + config.g2N_s2 * d / (kSpeedOfLight * omega * omega);
  }
};

inline StepEquation step_equation(const MediumBeamConfig& config, Detuning delta) {
  config.validate();
  return {config, delta, wavenumber(config)};
}

struct PlanOptions {
  double dz_m = 1e-5;
  double z_total_m = 1e-2;
  double absorber_fraction = 0.1;   // layer width / half-extent
  double absorber_strength = 2e4;   // peak damping rate, m^-1; 0 disables
  std::size_t record_every = 10;    // steps between diagnostics
  std::size_t snapshot_every = 0;   // steps between stored fields; 0 = first and last only
  bool expect_bound = true;         // absorber losses above 1 % are an error
  double phase_limit_rad = 0.1;     // kinetic phase per step allowed on the field's spectrum
  double spectral_tolerance = 1e-6; // power fraction allowed beyond that limit
};

/// Everything that stays fixed during a run on a given grid.
struct PropagationPlan {
  StepEquation equation;
  PlanOptions options;
  std::size_t steps = 0;
  double dz_m = 0.0;  // z_total / steps
  std::size_t n = 0;
  double extent_m = 0.0;
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double k_allowed = 0.0;                // |k| beyond which one step exceeds phase_limit
  std::vector<Complex> kinetic_half{};     // exp(-i k^2 dz / (4 k0)) / N^2, FFT order
  std::vector<Complex> kinetic_full{};     // exp(-i k^2 dz / (2 k0)) / N^2
  std::vector<Complex> potential_step{};   // exp(i V dz) * absorber
  std::vector<double> absorber{};          // per-step amplitude factor
  std::vector<unsigned char> beyond_k{};   // 1 where |k| > k_allowed
  std::vector<unsigned char> in_layer{};   // 1 inside the absorbing layer

  /// Width of the absorbing layer, m.
  double layer_width() const { return options.absorber_fraction * extent_m; }
};

namespace detail {

inline double fft_wavenumber(std::size_t i, std::size_t n, double dx) {
  const auto k = static_cast<double>(i < n / 2 ? static_cast<long long>(i)
                                               : static_cast<long long>(i) - static_cast<long long>(n));
  return 2.0 * std::numbers::pi * k / (static_cast<double>(n) * dx);
}

/// FFTW's planner is not re-entrant.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n) : n_(n) {
    data_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n * n));
    require(data_ != nullptr, ErrorCode::InvalidArgument, "cannot allocate FFT buffer");
    std::lock_guard lock(fftw_planner_mutex());
    const int ni = static_cast<int>(n);
    forward_ = fftw_plan_dft_2d(ni, ni, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(ni, ni, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  ~FftBuffer() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(data_);
  }

  std::span<Complex> values() { return {reinterpret_cast<Complex*>(data_), n_ * n_}; }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

 private:
  std::size_t n_;
  fftw_complex* data_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Fraction of spectral power on the flagged wavenumbers.
inline double flagged_fraction(std::span<const Complex> spectrum, std::span<const unsigned char> flag) {
  double hit = 0.0, total = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double p = std::norm(spectrum[i]);
    total += p;
    if (flag[i]) hit += p;
  }
  return total > 0.0 ? hit / total : 0.0;
}

inline void check_spectrum(const PropagationPlan& plan, std::span<const Complex> spectrum, double z) {
  const double frac = flagged_fraction(spectrum, plan.beyond_k);
  if (frac > plan.options.spectral_tolerance) {
    fail(ErrorCode::UnstableStep,
         std::to_string(frac) + " of the spectral power exceeds " +
             std::to_string(plan.options.phase_limit_rad) + " rad of diffraction phase per step at z=" +
             std::to_string(z) + " m; reduce --dz (now " + std::to_string(plan.dz_m) + " m)");
  }
}

inline double layer_fraction(const PropagationPlan& plan, const Field2D& field) {
  double in = 0.0, total = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double p = std::norm(field.values[i]);
    total += p;
    if (plan.in_layer[i]) in += p;
  }
  return total > 0.0 ? in / total : 0.0;
}

}  // namespace detail

/// Builds the step factors for the input's grid and checks the step-size
/// guard against the input spectrum.
inline PropagationPlan make_plan(const Field2D& input, const MediumBeamConfig& config, Detuning delta,
                                 const PlanOptions& options = {}) {
  require(options.dz_m > 0.0 && std::isfinite(options.dz_m), ErrorCode::InvalidArgument, "dz must be positive");
  require(options.z_total_m > 0.0 && std::isfinite(options.z_total_m), ErrorCode::InvalidArgument,
          "z_total must be positive");
  require(options.absorber_fraction >= 0.0 && options.absorber_fraction < 0.5, ErrorCode::InvalidArgument,
          "absorber width fraction must lie in [0, 0.5)");
  require(options.absorber_strength >= 0.0, ErrorCode::InvalidArgument, "absorber strength must be >= 0");
  require(options.record_every >= 1, ErrorCode::InvalidArgument, "record_every must be >= 1");
  require(input.values.size() == input.n * input.n && input.n >= 2, ErrorCode::InvalidArgument,
          "malformed field");

  PropagationPlan plan{.equation = step_equation(config, delta), .options = options};
  plan.steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.z_total_m / options.dz_m)));
  plan.dz_m = options.z_total_m / static_cast<double>(plan.steps);
  plan.n = input.n;
  plan.extent_m = input.extent_m;
  plan.center_x_m = input.center_x_m;
  plan.center_y_m = input.center_y_m;

  const std::size_t n = plan.n;
  const double dx = input.dx();
  const double dz = plan.dz_m;
  const double k0 = plan.equation.k0;
  const double scale = 1.0 / static_cast<double>(n * n);
  plan.k_allowed = std::sqrt(options.phase_limit_rad * 2.0 * k0 / dz);
  plan.kinetic_half.resize(n * n);
  plan.kinetic_full.resize(n * n);
  plan.beyond_k.resize(n * n);
  for (std::size_t iy = 0; iy < n; ++iy) {
    const double ky = detail::fft_wavenumber(iy, n, dx);
    for (std::size_t ix = 0; ix < n; ++ix) {
      const double kx = detail::fft_wavenumber(ix, n, dx);
      const double k2 = kx * kx + ky * ky;
      const double phase = k2 * plan.equation.diffraction_coefficient() * dz;
      plan.kinetic_half[iy * n + ix] = scale * std::polar(1.0, -0.5 * phase);
      plan.kinetic_full[iy * n + ix] = scale * std::polar(1.0, -phase);
      plan.beyond_k[iy * n + ix] = k2 > plan.k_allowed * plan.k_allowed;
    }
  }

  const double w = plan.layer_width();
  plan.potential_step.resize(n * n);
  plan.absorber.resize(n * n);
  plan.in_layer.resize(n * n);
  for (std::size_t iy = 0; iy < n; ++iy) {
    const double y = input.coordinate(iy);
    for (std::size_t ix = 0; ix < n; ++ix) {
      const double x = input.coordinate(ix);
      // separable in x and y so the layer has no kink along the diagonals
      const double ex = std::max(0.0, std::abs(x) - (plan.extent_m - w));
      const double ey = std::max(0.0, std::abs(y) - (plan.extent_m - w));
      double damp = 1.0;
      if (w > 0.0 && (ex > 0.0 || ey > 0.0)) {
        const double shape = 2.0 - std::exp(-std::pow(ex / w, 8)) - std::exp(-std::pow(ey / w, 8));
        damp = std::exp(-options.absorber_strength * dz * shape);
      }
      const std::size_t i = iy * n + ix;
      plan.in_layer[i] = w > 0.0 && (ex > 0.0 || ey > 0.0);
      plan.absorber[i] = damp;
      const double r = std::hypot(x - plan.center_x_m, y - plan.center_y_m);
      plan.potential_step[i] = damp * std::polar(1.0, plan.equation.potential_rate(r) * dz);
    }
  }

  if (options.absorber_strength > 0.0) {
    const double frac = detail::layer_fraction(plan, input);
    if (frac > 0.01) {
      fail(ErrorCode::PowerLoss, std::to_string(100.0 * frac) +
                                     "% of the input power sits in the absorbing layer; enlarge the grid extent");
    }
  }

  detail::FftBuffer buf(n);
  std::copy(input.values.begin(), input.values.end(), buf.values().begin());
  buf.forward();
  detail::check_spectrum(plan, buf.values(), 0.0);
  return plan;
}

struct Diagnostics {
  double z_m;
  double power;              // \iint |E|^2
  double rms_radius_m;       // about the beam axis
  double overlap;            // |<E(0), E(z)>| / (|E(0)| |E(z)|)
  double phase_rad;          // unwrapped arg E on axis, relative to z = 0
  double overlap_phase_rad;  // unwrapped arg <E(0), E(z)>
};

struct Snapshot {
  double z_m;
  Field2D field;
};

struct Trajectory {
  std::vector<Diagnostics> diagnostics;
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;
  double dz_m = 0.0;
};

namespace detail {

inline double rms_radius(const Field2D& f) {
  double s = 0.0, p = 0.0;
  for (std::size_t iy = 0; iy < f.n; ++iy) {
    const double y = f.coordinate(iy) - f.center_y_m;
    for (std::size_t ix = 0; ix < f.n; ++ix) {
      const double x = f.coordinate(ix) - f.center_x_m;
      const double q = std::norm(f.at(ix, iy));
      s += (x * x + y * y) * q;
      p += q;
    }
  }
  return std::sqrt(s / p);
}

inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// Adds the wrapped increment from `previous` to `current` onto `accumulated`.
inline double unwrap(double accumulated, Complex previous, Complex current) {
  return accumulated + std::arg(current * std::conj(previous));
}

}  // namespace detail

/// Runs the plan on `input` (which must sit on the plan's grid).
inline Trajectory propagate(const Field2D& input, const PropagationPlan& plan) {
  require(input.n == plan.n && input.extent_m == plan.extent_m && input.center_x_m == plan.center_x_m &&
              input.center_y_m == plan.center_y_m,
          ErrorCode::InvalidArgument, "field does not match the propagation plan's grid");
  const std::size_t n = plan.n;
  const double cell = input.dx() * input.dx();
  Trajectory out;
  out.steps = plan.steps;
  out.dz_m = plan.dz_m;

  detail::FftBuffer buf(n);
  auto work = buf.values();
  std::copy(input.values.begin(), input.values.end(), work.begin());

  const std::span<const Complex> e0(input.values);
  const double norm0 = std::sqrt(detail::inner(e0, e0).real());
  const double power0 = norm0 * norm0 * cell;
  const Complex axis0 = input.sample(plan.center_x_m, plan.center_y_m);
  require(std::abs(axis0) > 0.0, ErrorCode::InvalidArgument, "field vanishes on the axis; on-axis phase undefined");

  Field2D current = input;
  Complex axis_prev = axis0, overlap_prev = detail::inner(e0, e0);
  double axis_phase = 0.0, overlap_phase = 0.0;

  auto record = [&](double z) {
    std::copy(work.begin(), work.end(), current.values.begin());
    const std::span<const Complex> ez(current.values);
    const double norm_z = std::sqrt(detail::inner(ez, ez).real());
    const Complex ov = detail::inner(e0, ez);
    out.diagnostics.push_back({z, norm_z * norm_z * cell, detail::rms_radius(current),
                               std::abs(ov) / (norm0 * norm_z), axis_phase, overlap_phase});
    const double loss = 1.0 - norm_z * norm_z * cell / power0;
    if (plan.options.expect_bound && loss > 0.01) {
      fail(ErrorCode::PowerLoss, "absorber removed " + std::to_string(100.0 * loss) + "% of the power by z=" +
                                     std::to_string(z) + " m; the input is not bound or the grid is too small");
    }
  };
  auto snapshot = [&](double z) { out.snapshots.push_back({z, current}); };

  record(0.0);
  snapshot(0.0);
  // Between records the closing half kick of one step is fused with the
  // opening half kick of the next, so `work` then lags E(z) by half a
  // diffraction step. That is harmless for phase unwrapping; records and
  // snapshots always see the completed step.
  bool synced = true;
  for (std::size_t s = 1; s <= plan.steps; ++s) {
    const double z = static_cast<double>(s) * plan.dz_m;
    const bool at_record = s % plan.options.record_every == 0 || s == plan.steps;
    const bool at_snapshot =
        s == plan.steps || (plan.options.snapshot_every > 0 && s % plan.options.snapshot_every == 0);

    buf.forward();
    const auto& kick = synced ? plan.kinetic_half : plan.kinetic_full;
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= kick[i];
    buf.backward();
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= plan.potential_step[i];
    synced = false;
    if (at_record || at_snapshot) {
      buf.forward();
      detail::check_spectrum(plan, work, z);
      for (std::size_t i = 0; i < work.size(); ++i) work[i] *= plan.kinetic_half[i];
      buf.backward();
      synced = true;
    }

    // phases are tracked every step so the unwrapping never aliases
    std::copy(work.begin(), work.end(), current.values.begin());
    const Complex axis = current.sample(plan.center_x_m, plan.center_y_m);
    axis_phase = detail::unwrap(axis_phase, axis_prev, axis);
    axis_prev = axis;
    const Complex ov = detail::inner(e0, std::span<const Complex>(current.values));
    overlap_phase = detail::unwrap(overlap_phase, overlap_prev, ov);
    overlap_prev = ov;

    if (at_record) record(z);
    if (at_snapshot) snapshot(z);
  }
  return out;
}

/// Least-squares slope of a diagnostics column against z.
inline double phase_slope(std::span<const Diagnostics> d, bool use_overlap_phase = false) {
  require(d.size() >= 2, ErrorCode::InvalidArgument, "need at least two records for a slope");
  double mz = 0.0, mp = 0.0;
  for (const auto& r : d) {
    mz += r.z_m;
    mp += use_overlap_phase ? r.overlap_phase_rad : r.phase_rad;
  }
  mz /= static_cast<double>(d.size());
  mp /= static_cast<double>(d.size());
  double szz = 0.0, szp = 0.0;
  for (const auto& r : d) {
    const double p = use_overlap_phase ? r.overlap_phase_rad : r.phase_rad;
    szz += (r.z_m - mz) * (r.z_m - mz);
    szp += (r.z_m - mz) * (p - mp);
  }
  return szp / szz;
}

}  // namespace eit
