#include <catch_amalgamated.hpp>

#include "eitmodes/dispersion.hpp"

#include <cmath>
#include <string>

using namespace eit;
using Catch::Approx;

namespace {

const MediumBeamConfig kDefaults = MediumBeamConfig::defaults();
constexpr Detuning kDelta{-1e6};

double free_slope(const MediumBeamConfig& cfg) {
  return -2.0 * wavenumber(cfg) * cfg.g2N_s2 / (kSpeedOfLight * cfg.omega0_s * cfg.omega0_s);
}

Spectrum solve(int m, int n_max, Detuning delta, std::optional<double> radius = {}) {
  SpectrumRequest req;
  req.m_list = {m};
  req.n_max = n_max;
  req.delta = delta;
  req.radius_m = radius;
  return solve_spectrum(req, kDefaults);
}

}  // namespace

TEST_CASE("group velocity from the slope", "[dispersion]") {
  CHECK(group_velocity(0.0, kDefaults) == kSpeedOfLight);
  CHECK(group_velocity(free_slope(kDefaults), kDefaults) ==
        Approx(transverse_free_vg(kDefaults)).epsilon(1e-14));
  CHECK(group_velocity(free_slope(kDefaults), kDefaults) / kSpeedOfLight ==
        Approx(1e-6).epsilon(1.0000001e-6));
  try {
    group_velocity(1e-3, kDefaults);
    FAIL("expected NonNegativeSlope");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonNegativeSlope);
  }
}

TEST_CASE("Hellmann-Feynman slope with a uniform control beam", "[dispersion][hf]") {
  const auto ground = solve(0, 1, kDelta).modes[0];
  auto uniform = kDefaults;
  uniform.profile = ControlProfile::uniform(kDefaults.omega0_s, 1e-3);
  const double slope = hellmann_feynman_slope(ground, uniform);
  CHECK(slope == Approx(free_slope(kDefaults)).epsilon(1e-12));
  CHECK(group_velocity(slope, uniform) == Approx(transverse_free_vg(kDefaults)).epsilon(1e-12));
}

TEST_CASE("Hellmann-Feynman slope with the gaussian beam", "[dispersion][hf]") {
  const auto spec = solve(0, 2, kDelta);
  const auto& ground = spec.modes[0];
  const double a = kDefaults.beam_radius_m;
  double expect = 0.0;
  for (std::size_t j = 0; j < ground.psi.size(); ++j) {
    const double r = ground.grid.node(j);
    expect += r * ground.psi[j] * ground.psi[j] * std::exp(r * r / (a * a));
  }
  expect *= ground.grid.dr * free_slope(kDefaults);
  const double slope = hellmann_feynman_slope(ground, kDefaults);
  CHECK(slope == Approx(expect).epsilon(1e-12));
  CHECK(slope < free_slope(kDefaults));

  const double vg1 = group_velocity(slope, kDefaults);
  const double vg2 = group_velocity(hellmann_feynman_slope(spec.modes[1], kDefaults), kDefaults);
  CHECK(vg2 < vg1);
  CHECK(vg1 < 1e-6 * kSpeedOfLight);
  CHECK(vg1 < transverse_free_vg(kDefaults));
}

TEST_CASE("Hellmann-Feynman slope matches a central finite difference", "[dispersion][hf][oracle]") {
  const double R = auto_truncation_radius(kDefaults, kDelta, 1, 0);
  const auto ground = solve(0, 1, kDelta, R).modes[0];
  const double h = 1e-3 * std::abs(kDelta.value());
  const double bp = solve(0, 1, Detuning{kDelta.value() + h}, R).modes[0].beta;
  const double bm = solve(0, 1, Detuning{kDelta.value() - h}, R).modes[0].beta;
  const double fd = (bp - bm) / (2.0 * h);
  CHECK(hellmann_feynman_slope(ground, kDefaults) == Approx(fd).epsilon(1e-6));
}

TEST_CASE("detuning grid", "[dispersion]") {
  const auto g = detuning_grid(-1e7, -1e5, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == Approx(-1e5));
  CHECK(g[1] == Approx(-1e6));
  CHECK(g[2] == Approx(-1e7));
  CHECK(detuning_grid(-1e6, -1e6, 1).front() == Approx(-1e6));
  CHECK_THROWS_AS(detuning_grid(-1e6, 1e6, 4), Error);
}

TEST_CASE("sweep over the m = 0 family", "[dispersion][sweep]") {
  const std::vector<Channel> channels{{0, 1}, {0, 2}, {0, 3}};
  const auto deltas = detuning_grid(-1e7, -1e5, 20);
  const auto table = sweep(channels, deltas, kDefaults);
  REQUIRE(table.rows.size() == 60);
  const double vfree = transverse_free_vg(kDefaults);
  for (const auto& row : table.rows) {
    CHECK(row.vg_mps > 0.0);
    CHECK(row.vg_mps < vfree);
    CHECK(row.slope_hf < 0.0);
    CHECK(row.slope_hf == Approx(row.slope_fd).epsilon(1e-5));
  }
  for (std::size_t k = 0; k < channels.size(); ++k) {
    for (std::size_t i = 1; i < deltas.size(); ++i) {
      // |delta| grows with i: deeper, narrower well
      CHECK(table.at(i, k).beta_m2 > table.at(i - 1, k).beta_m2);
      // tighter confinement samples less of exp(r^2/a^2), so V_g climbs
      // toward the transverse-free limit
      CHECK(table.at(i, k).vg_mps > table.at(i - 1, k).vg_mps);
    }
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    CHECK(table.at(i, 0).vg_mps > table.at(i, 1).vg_mps);
    CHECK(table.at(i, 1).vg_mps > table.at(i, 2).vg_mps);
  }
}

TEST_CASE("vortex channel ordering", "[dispersion][sweep]") {
  const std::vector<Channel> channels{{1, 1}, {2, 1}, {1, 2}, {2, 2}};
  const std::vector<double> deltas{-1e5, -1e6, -1e7};
  const auto table = sweep(channels, deltas, kDefaults);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double v11 = table.at(i, 0).vg_mps, v21 = table.at(i, 1).vg_mps;
    const double v12 = table.at(i, 2).vg_mps, v22 = table.at(i, 3).vg_mps;
    CHECK(v11 > v21);
    CHECK(v12 > v22);
    CHECK(v11 > v12);
    CHECK(v21 > v22);
    if (deltas[i] == -1e6) CHECK(v21 > v12);
  }
}

TEST_CASE("single-point sweep equals direct composition", "[dispersion][sweep]") {
  const std::vector<Channel> channels{{1, 2}};
  const std::vector<double> deltas{kDelta.value()};
  const auto table = sweep(channels, deltas, kDefaults);
  const auto mode = solve(1, 2, kDelta).modes[1];
  CHECK(table.rows[0].beta_m2 == mode.beta);
  CHECK(table.rows[0].vg_mps == group_velocity(hellmann_feynman_slope(mode, kDefaults), kDefaults));
}

TEST_CASE("sweep errors", "[dispersion][errors]") {
  const std::vector<Channel> none;
  const std::vector<double> deltas{-1e6};
  CHECK_THROWS_AS(sweep(none, deltas, kDefaults), Error);
  const std::vector<Channel> one{{0, 1}};
  const std::vector<double> bad{-1e6, 1e6};
  try {
    sweep(one, bad, kDefaults);
    FAIL("expected NotNegativeDetuning");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNegativeDetuning);
  }
  SweepOptions tiny;
  tiny.radius_m = 0.5 * kDefaults.beam_radius_m;
  tiny.n_points = 400;
  const std::vector<Channel> high{{0, 4}};
  try {
    sweep(high, deltas, kDefaults, tiny);
    FAIL("expected TruncationFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationFailed);
    CHECK(std::string(e.what()).find("n=4") != std::string::npos);
    CHECK(std::string(e.what()).find("delta=") != std::string::npos);
  }
}

TEST_CASE("group velocity approaches the transverse-free value for wide beams", "[dispersion][beam]") {
  std::vector<double> a_grid;
  for (double a = 10e-6; a <= 1000e-6 * 1.0001; a *= std::pow(100.0, 1.0 / 10.0)) a_grid.push_back(a);
  const auto points = beam_size_asymptotics({0, 1}, kDelta, a_grid, kDefaults);
  REQUIRE(points.size() == a_grid.size());
  for (std::size_t i = 1; i < points.size(); ++i) CHECK(points[i].vg_mps > points[i - 1].vg_mps);
  const double vfree = transverse_free_vg(kDefaults);
  CHECK(points.back().vg_mps < vfree);
  CHECK(std::abs(points.back().vg_mps / vfree - 1.0) < 0.01);

  const std::vector<double> pair{0.2 * 50e-6, 50e-6};
  const auto focused = beam_size_asymptotics({0, 1}, kDelta, pair, kDefaults);
  CHECK(focused[0].vg_mps < focused[1].vg_mps);

  const std::vector<double> unsorted{50e-6, 10e-6};
  CHECK_THROWS_AS(beam_size_asymptotics({0, 1}, kDelta, unsorted, kDefaults), Error);
}
