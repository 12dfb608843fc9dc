#include <catch_amalgamated.hpp>

#include "eitmodes/radial_solver.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <random>

using namespace eit;
using Catch::Approx;

namespace {

const MediumBeamConfig kDefaults = MediumBeamConfig::defaults();
constexpr Detuning kDelta{-1e6};

double hard_wall_ground(int m, std::size_t n_points, double radius) {
  const auto grid = RadialGrid::make(n_points, radius, m);
  const std::vector<double> zero(n_points, 0.0);
  return kth_eigenvalue(assemble_operator(grid, zero), 0);
}

Spectrum solve(std::vector<int> m_list, int n_max, std::optional<std::size_t> n_points = {},
               std::optional<double> radius = {}) {
  SpectrumRequest req;
  req.m_list = std::move(m_list);
  req.n_max = n_max;
  req.delta = kDelta;
  req.n_points = n_points;
  req.radius_m = radius;
  return solve_spectrum(req, kDefaults);
}

}  // namespace

TEST_CASE("stencil entries", "[radial][assemble]") {
  const auto grid = RadialGrid::make(400, 150e-6, 2);
  const auto op = assemble_operator(kDefaults, kDelta, grid);
  const double h2 = grid.dr * grid.dr;
  for (std::size_t j : {0u, 1u, 17u, 200u, 398u}) {
    const double r = grid.node(j);
    CHECK(op.diag[j] == Approx(2.0 / h2 + 4.0 / (r * r) + potential(kDefaults, kDelta, r)).epsilon(1e-14));
    const double jj = static_cast<double>(j + 1);
    CHECK(op.off[j] == Approx(-jj / (h2 * std::sqrt(jj * jj - 0.25))).epsilon(1e-14));
  }
  // far from the axis the coupling tends to the plain second difference
  CHECK(op.off[398] == Approx(-1.0 / h2).epsilon(1e-5));
}

TEST_CASE("m and -m give the identical operator", "[radial][assemble]") {
  for (int m : {1, 2, 5}) {
    const auto a = assemble_operator(kDefaults, kDelta, RadialGrid::make(300, 150e-6, m));
    const auto b = assemble_operator(kDefaults, kDelta, RadialGrid::make(300, 150e-6, -m));
    CHECK(a.diag == b.diag);
    CHECK(a.off == b.off);
  }
}

TEST_CASE("hard-wall disk matches Bessel zeros with second-order convergence", "[radial][oracle]") {
  for (int m : {0, 1, 2}) {
    const double j0 = boost::math::cyl_bessel_j_zero(static_cast<double>(m), 1);
    const double exact = j0 * j0;  // R = 1
    const double e1 = hard_wall_ground(m, 500, 1.0) - exact;
    const double e2 = hard_wall_ground(m, 1000, 1.0) - exact;
    const double e4 = hard_wall_ground(m, 4000, 1.0) - exact;
    CHECK(std::abs(e4) / exact < 1e-4);
    CHECK(e1 / e2 == Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("truncation radius", "[radial][truncation]") {
  const double v0 = well_floor(kDefaults, kDelta);
  const double a = kDefaults.beam_radius_m;

  SECTION("algebraic inversion for the gaussian profile") {
    for (double target : {std::exp(16.0) / 10.0, std::exp(25.0) / 10.0, std::exp(10.0)}) {
      const auto r = barrier_radius(kDefaults, kDelta, target * v0);
      REQUIRE(r);
      CHECK(*r == Approx(a * std::sqrt(std::log(10.0 * target))).epsilon(1e-9));
    }
  }
  SECTION("shallow estimate clamps to 3a") {
    CHECK(*barrier_radius(kDefaults, kDelta, v0) == Approx(a * std::sqrt(std::log(10.0))).epsilon(1e-9));
    CHECK(auto_truncation_radius(kDefaults, kDelta, v0) == Approx(3.0 * a));
  }
  SECTION("default estimate lies in [3a, 20a] and the ground level is converged in R") {
    const double R = auto_truncation_radius(kDefaults, kDelta, 3, 0);
    CHECK(R >= 3.0 * a);
    CHECK(R <= 20.0 * a);
    const double b1 = solve({0}, 1, {}, R).modes[0].beta;
    const double b2 = solve({0}, 1, {}, 1.5 * R).modes[0].beta;
    CHECK(std::abs(b1 - b2) / b1 < 1e-6);
  }
  SECTION("non-decaying control beam cannot confine") {
    auto cfg = kDefaults;
    cfg.profile = ControlProfile::uniform(cfg.omega0_s, 1e-3);
    try {
      auto_truncation_radius(cfg, kDelta, 3, 0);
      FAIL("expected TruncationFailed");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TruncationFailed);
    }
  }
}

TEST_CASE("lowest m = 0 modes at default parameters", "[radial][spectrum]") {
  const auto spec = solve({0}, 3);
  REQUIRE(spec.modes.size() == 3);
  CHECK(spec.dropped.empty());
  const double v0 = well_floor(kDefaults, kDelta);
  const double barrier = potential(kDefaults, kDelta, spec.modes[0].grid.radius());
  for (int n = 1; n <= 3; ++n) {
    const auto& mode = spec.modes[n - 1];
    CHECK(mode.n == n);
    CHECK(mode.nodes == n - 1);
    CHECK(count_nodes(mode.psi) == n - 1);
    CHECK(mode.beta > v0);
    CHECK(mode.beta < barrier);
    CHECK(mode_overlap(mode, mode) == Approx(1.0).epsilon(1e-8));
    CHECK(mode.psi.front() > 0.0);
    if (n > 1) CHECK(mode.beta > spec.modes[n - 2].beta * (1.0 + 1e-12));
  }
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < i; ++k) CHECK(std::abs(mode_overlap(spec.modes[i], spec.modes[k])) < 1e-6);
  }
  const auto& ground = spec.modes[0].psi;
  for (std::size_t j = 1; j < ground.size(); ++j) {
    if (ground[j - 1] < 1e-12 * ground[0]) break;
    CHECK(ground[j] < ground[j - 1]);
  }
}

TEST_CASE("higher channels carry the same node rule and a zero on axis", "[radial][spectrum]") {
  const auto spec = solve({1, 2}, 3);
  REQUIRE(spec.modes.size() == 6);
  for (const auto& mode : spec.modes) {
    CHECK(mode.nodes == mode.n - 1);
    CHECK(mode.value_at(0.0) == 0.0);
    CHECK(std::abs(mode.psi.front()) < 1e-2 * std::abs(*std::max_element(
        mode.psi.begin(), mode.psi.end(), [](double x, double y) { return std::abs(x) < std::abs(y); })));
  }
}

TEST_CASE("+m and -m are bitwise identical", "[radial][spectrum]") {
  const auto plus = solve({1, 2}, 2);
  const auto minus = solve({-1, -2}, 2);
  REQUIRE(plus.modes.size() == minus.modes.size());
  for (std::size_t i = 0; i < plus.modes.size(); ++i) {
    CHECK(plus.modes[i].beta == minus.modes[i].beta);
    CHECK(plus.modes[i].psi == minus.modes[i].psi);
    CHECK(minus.modes[i].m == -plus.modes[i].m);
  }
}

TEST_CASE("harmonic-plus-quartic perturbation oracle", "[radial][oracle]") {
  // V0 e^{x} ~ V0 (1 + x + x^2/2), x = r^2/a^2. Harmonic levels
  // V0 + (2(n-1)+|m|+1) hw with hw = 2 sqrt(V0)/a, first-order quartic shift
  // (V0 / 2a^4) <r^4> = (1/a^2) for (0,1) and (3/a^2) for (1,1).
  const double v0 = well_floor(kDefaults, kDelta);
  const double hw = harmonic_quantum(kDefaults, kDelta);
  const double a2 = kDefaults.beam_radius_m * kDefaults.beam_radius_m;
  const auto spec = solve({0, 1}, 1);
  CHECK(spec.modes[0].beta - v0 == Approx(hw + 1.0 / a2).epsilon(1e-2));
  CHECK(spec.modes[1].beta - v0 == Approx(2.0 * hw + 3.0 / a2).epsilon(1e-2));
  CHECK(std::abs(spec.modes[0].beta - v0 - hw) / hw < 0.05);
}

TEST_CASE("second-order grid convergence of the ground level", "[radial][convergence]") {
  const double R = auto_truncation_radius(kDefaults, kDelta, 3, 0);
  const double b1 = solve({0}, 1, 1000, R).modes[0].beta;
  const double b2 = solve({0}, 1, 2000, R).modes[0].beta;
  const double b4 = solve({0}, 1, 4000, R).modes[0].beta;
  const double ratio = std::abs(b1 - b2) / std::abs(b2 - b4);
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}

TEST_CASE("gaussian trial is a variational upper bound", "[radial][variational]") {
  const auto spec = solve({0}, 1);
  const auto& ground = spec.modes[0];
  const auto op = assemble_operator(kDefaults, kDelta, ground.grid);
  double best = std::numeric_limits<double>::infinity();
  for (double w = 5e-6; w < 40e-6; w += 0.5e-6) {
    std::vector<double> trial(ground.grid.n_points);
    for (std::size_t j = 0; j < trial.size(); ++j) {
      const double r = ground.grid.node(j);
      trial[j] = std::exp(-r * r / (2 * w * w));
    }
    const double q = rayleigh_quotient(ground.grid, op, trial);
    CHECK(q >= ground.beta);
    best = std::min(best, q);
  }
  CHECK(best / ground.beta - 1.0 < 0.03);
}

TEST_CASE("modes above the truncation barrier are dropped and reported", "[radial][spectrum]") {
  const auto spec = solve({0}, 4, 400, 0.5 * kDefaults.beam_radius_m);
  CHECK(spec.modes.size() == 1);
  REQUIRE(spec.dropped.size() == 3);
  CHECK(spec.dropped[0].n == 2);
  CHECK(spec.dropped[0].beta >= spec.dropped[0].barrier);
}

TEST_CASE("count_nodes", "[radial]") {
  CHECK(count_nodes(std::vector<double>{1, 2, 3, 2, 1}) == 0);
  CHECK(count_nodes(std::vector<double>{1, 0.5, -0.5, -1, 0.2}) == 2);
  CHECK(count_nodes(std::vector<double>{1, 1e-12, -1e-12, 1e-12, 0.5}) == 0);
}

TEST_CASE("precondition errors", "[radial][errors]") {
  SpectrumRequest req;
  req.m_list = {0};
  req.delta = Detuning{1e6};
  try {
    solve_spectrum(req, kDefaults);
    FAIL("expected NotNegativeDetuning");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNegativeDetuning);
  }
  req.delta = Detuning{0.0};
  CHECK_THROWS_AS(solve_spectrum(req, kDefaults), Error);
  CHECK_THROWS_AS(RadialGrid::make(100, 1e-4, 0), Error);
  req.delta = kDelta;
  req.n_max = 0;
  CHECK_THROWS_AS(solve_spectrum(req, kDefaults), Error);
}
