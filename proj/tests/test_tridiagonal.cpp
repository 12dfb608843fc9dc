#include <catch_amalgamated.hpp>

#include "eitmodes/tridiagonal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace eit;
using Catch::Approx;

namespace {

SymmetricTridiagonal toeplitz(std::size_t n) {
  return {std::vector<double>(n, 2.0), std::vector<double>(n - 1, -1.0)};
}

SymmetricTridiagonal random_matrix(std::size_t n, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  SymmetricTridiagonal t;
  for (std::size_t i = 0; i < n; ++i) t.diag.push_back(d(rng));
  for (std::size_t i = 0; i + 1 < n; ++i) t.off.push_back(d(rng));
  return t;
}

}  // namespace

TEST_CASE("Toeplitz spectrum by bisection", "[tridiagonal]") {
  const std::size_t n = 500;
  const auto t = toeplitz(n);
  for (std::size_t k = 0; k < 5; ++k) {
    const double exact = 2.0 - 2.0 * std::cos((k + 1) * std::numbers::pi / (n + 1));
    CHECK(kth_eigenvalue(t, k) == Approx(exact).epsilon(1e-12).margin(1e-15));
  }
  CHECK(kth_eigenvalue(t, n - 1) ==
        Approx(2.0 - 2.0 * std::cos(n * std::numbers::pi / (n + 1))).epsilon(1e-14));
}

TEST_CASE("Sturm count is the number of eigenvalues below x", "[tridiagonal]") {
  const std::size_t n = 50;
  const auto t = toeplitz(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double exact = 2.0 - 2.0 * std::cos((k + 1) * std::numbers::pi / (n + 1));
    CHECK(sturm_count(t, exact - 1e-9) == k);
    CHECK(sturm_count(t, exact + 1e-9) == k + 1);
  }
  auto [lo, hi] = gershgorin_bounds(t);
  CHECK(sturm_count(t, lo) == 0);
  CHECK(sturm_count(t, hi + 1e-12) == n);
}

TEST_CASE("eigenpairs agree with a dense solver on random matrices", "[tridiagonal][property]") {
  std::mt19937 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + trial * 7;
    const auto t = random_matrix(n, rng);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      dense(i, i) = t.diag[i];
      if (i + 1 < n) dense(i, i + 1) = dense(i + 1, i) = t.off[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    const auto pairs = lowest_eigenpairs(t, 4);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(pairs[k].value == Approx(es.eigenvalues()(k)).margin(1e-11));
      const auto tv = t.apply(pairs[k].vector);
      double resid = 0.0;
      for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(tv[i] - pairs[k].value * pairs[k].vector[i]));
      CHECK(resid < 1e-10);
      for (std::size_t l = 0; l < k; ++l) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += pairs[k].vector[i] * pairs[l].vector[i];
        CHECK(std::abs(dot) < 1e-12);
      }
    }
  }
}

TEST_CASE("inverse iteration handles a reducible matrix", "[tridiagonal]") {
  SymmetricTridiagonal t{{1.0, 3.0, 2.0, 5.0}, {0.0, 0.0, 0.0}};
  const auto pairs = lowest_eigenpairs(t, 4);
  CHECK(pairs[0].value == Approx(1.0));
  CHECK(pairs[1].value == Approx(2.0));
  CHECK(std::abs(pairs[1].vector[2]) == Approx(1.0));
  CHECK(pairs[3].value == Approx(5.0));
}

TEST_CASE("invalid shapes are rejected", "[tridiagonal]") {
  SymmetricTridiagonal t{{1.0, 2.0}, {}};
  CHECK_THROWS_AS(kth_eigenvalue(t, 0), Error);
  CHECK_THROWS_AS(kth_eigenvalue(toeplitz(3), 3), Error);
}
