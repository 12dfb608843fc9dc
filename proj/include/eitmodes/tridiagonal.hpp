#pragma once

// Selective symmetric tridiagonal eigensolver: bisection on the Sturm
// sequence for the lowest eigenvalues, inverse iteration for the vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eitmodes/error.hpp"

namespace eit {

struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // off[i] couples rows i and i+1

  std::size_t size() const { return diag.size(); }

  void validate() const {
    require(!diag.empty(), ErrorCode::InvalidArgument, "empty tridiagonal matrix");
    require(off.size() + 1 == diag.size(), ErrorCode::InvalidArgument,
            "off-diagonal must have n-1 entries");
  }

  /// y = T x
  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  /// Max-row-sum norm.
  double norm_inf() const {
    double nrm = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      double s = std::abs(diag[i]);
      if (i > 0) s += std::abs(off[i - 1]);
      if (i < off.size()) s += std::abs(off[i]);
      nrm = std::max(nrm, s);
    }
    return nrm;
  }
};

namespace detail {

inline double pivot_floor(const SymmetricTridiagonal& t) {
  double emax = 1.0;
  for (double e : t.off) emax = std::max(emax, e * e);
  return std::numeric_limits<double>::min() * emax;
}

}  // namespace detail

/// Number of eigenvalues strictly below x (LDL^T inertia of T - xI).
inline std::size_t sturm_count(const SymmetricTridiagonal& t, double x) {
  const double pivmin = detail::pivot_floor(t);
  std::size_t count = 0;
  double q = t.diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < t.size(); ++i) {
    q = t.diag[i] - x - t.off[i - 1] * t.off[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

/// Gershgorin interval enclosing the whole spectrum.
inline std::pair<double, double> gershgorin_bounds(const SymmetricTridiagonal& t) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(t.off[i - 1]);
    if (i < t.off.size()) radius += std::abs(t.off[i]);
    lo = std::min(lo, t.diag[i] - radius);
    hi = std::max(hi, t.diag[i] + radius);
  }
  return {lo, hi};
}

/// k-th smallest eigenvalue (k = 0 is the lowest), bisected to working precision.
inline double kth_eigenvalue(const SymmetricTridiagonal& t, std::size_t k, int max_iterations = 400) {
  t.validate();
  require(k < t.size(), ErrorCode::InvalidArgument, "eigenvalue index out of range");
  auto [lo, hi] = gershgorin_bounds(t);
  const double eps = std::numeric_limits<double>::epsilon();
  const double pivmin = detail::pivot_floor(t);
  const double spread = std::max(std::abs(lo), std::abs(hi));
  lo -= 2.0 * eps * spread + pivmin;
  hi += 2.0 * eps * spread + pivmin;
  for (int it = 0; it < max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double tol = 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + 4.0 * pivmin;
    if (hi - lo <= tol || mid == lo || mid == hi) return mid;
    if (sturm_count(t, mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  fail(ErrorCode::ConvergenceFailed,
       "bisection did not converge for eigenvalue " + std::to_string(k));
}

inline std::vector<double> lowest_eigenvalues(const SymmetricTridiagonal& t, std::size_t count) {
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) values[k] = kth_eigenvalue(t, k);
  return values;
}

namespace detail {

// LU factorisation of T - shift*I with partial pivoting (row interchanges
// only between neighbours), as in LAPACK's gttrf.
class ShiftedTridiagonalLU {
 public:
  ShiftedTridiagonalLU(const SymmetricTridiagonal& t, double shift)
      : n_(t.size()), lower_(t.off), diag_(t.diag), upper_(t.off),
        upper2_(n_ > 2 ? n_ - 2 : 0, 0.0), swapped_(n_ > 0 ? n_ - 1 : 0, false) {
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(t.norm_inf(), 1.0);
    for (double& d : diag_) d -= shift;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::abs(diag_[i]) >= std::abs(lower_[i])) {
        if (diag_[i] == 0.0) diag_[i] = tiny;
        const double fact = lower_[i] / diag_[i];
        lower_[i] = fact;
        diag_[i + 1] -= fact * upper_[i];
      } else {
        const double fact = diag_[i] / lower_[i];
        diag_[i] = lower_[i];
        lower_[i] = fact;
        const double temp = upper_[i];
        upper_[i] = diag_[i + 1];
        diag_[i + 1] = temp - fact * diag_[i + 1];
        if (i + 2 < n_) {
          upper2_[i] = upper_[i + 1];
          upper_[i + 1] = -fact * upper_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    if (diag_[n_ - 1] == 0.0) diag_[n_ - 1] = tiny;
  }

  void solve_in_place(std::vector<double>& b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (!swapped_[i]) {
        b[i + 1] -= lower_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - lower_[i] * b[i];
      }
    }
    b[n_ - 1] /= diag_[n_ - 1];
    if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - upper_[n_ - 2] * b[n_ - 1]) / diag_[n_ - 2];
    for (std::size_t i = n_ >= 2 ? n_ - 2 : 0; i-- > 0;) {
      b[i] = (b[i] - upper_[i] * b[i + 1] - upper2_[i] * b[i + 2]) / diag_[i];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> lower_, diag_, upper_, upper2_;
  std::vector<bool> swapped_;
};

inline double norm2(std::span<const double> x) {
  return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
}

}  // namespace detail

/// Unit eigenvector for an (accurate) eigenvalue by inverse iteration,
/// orthogonalised against the supplied previously computed vectors.
inline std::vector<double> inverse_iteration(const SymmetricTridiagonal& t, double eigenvalue,
                                             std::span<const std::vector<double>> previous = {},
                                             int iterations = 4) {
  const std::size_t n = t.size();
  const detail::ShiftedTridiagonalLU lu(t, eigenvalue);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);

  auto orthonormalise = [&](std::vector<double>& v) {
    for (const auto& p : previous) {
      const double proj = std::inner_product(v.begin(), v.end(), p.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) v[i] -= proj * p[i];
    }
    const double nrm = detail::norm2(v);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      fail(ErrorCode::ConvergenceFailed, "inverse iteration produced a degenerate vector");
    }
    for (double& vi : v) vi /= nrm;
  };

  orthonormalise(x);
  for (int it = 0; it < iterations; ++it) {
    lu.solve_in_place(x);
    orthonormalise(x);
  }
  return x;
}

struct Eigenpair {
  double value;
  std::vector<double> vector;
};

/// Lowest `count` eigenpairs in ascending order with orthonormal vectors.
inline std::vector<Eigenpair> lowest_eigenpairs(const SymmetricTridiagonal& t, std::size_t count) {
  t.validate();
  std::vector<Eigenpair> pairs;
  std::vector<std::vector<double>> vectors;
  pairs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double value = kth_eigenvalue(t, k);
    auto v = inverse_iteration(t, value, vectors);
    vectors.push_back(v);
    pairs.push_back({value, std::move(v)});
  }
  return pairs;
}

}  // namespace eit
