#ifndef BERTRAND_GEOMETRY_HPP
#define BERTRAND_GEOMETRY_HPP

// Euclidean geometry of the slope polytope
//   B = { x in R^m : x_i >= delta, sum_i x_i <= m }.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "bertrand/common.hpp"

namespace bertrand::geometry {

/// (g_0(y), g_1(y), ..., g_m(y)) = (m - sum y, y_1 - delta, ..., y_m - delta).
inline Vector constraint_values(const Vector& y, double delta) {
  const auto m = y.size();
  Vector g(m + 1);
  g[0] = static_cast<double>(m) - y.sum();
  g.tail(m) = y.array() - delta;
  return g;
}

namespace detail {

// Solves sum_i max(lower_i, y_i - mu) = target for the smallest mu >= 0,
// assuming the left side exceeds target at mu = 0. Entries with
// lower_i = -inf never clip. The left side is piecewise linear and
// nonincreasing in mu, so an exact scan over the sorted kinks finds mu.
inline double water_level(const Vector& y, const Vector& lower, double target) {
  const auto n = y.size();
  std::vector<double> kinks;
  kinks.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(lower[i])) kinks.push_back(y[i] - lower[i]);
  }
  std::sort(kinks.begin(), kinks.end());
  // Walk intervals [lo, hi] between consecutive kinks (starting at mu = 0).
  double lo = 0.0;
  std::size_t next = 0;
  while (next < kinks.size() && kinks[next] <= lo) ++next;
  for (;;) {
    const double hi = next < kinks.size() ? kinks[next] : std::numeric_limits<double>::infinity();
    // On (lo, hi) the unclipped set is fixed: entries whose kink exceeds lo.
    double free_sum = 0.0, clipped_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isfinite(lower[i]) || y[i] - lower[i] > lo) {
        free_sum += y[i];
        ++free_count;
      } else {
        clipped_sum += lower[i];
      }
    }
    if (free_count == 0) return lo;  // Everything clipped; sum is constant.
    const double mu = (free_sum + clipped_sum - target) / free_count;
    if (mu <= hi) return std::max(mu, lo);
    lo = hi;
    while (next < kinks.size() && kinks[next] <= lo) ++next;
  }
}

}  // namespace detail

/// Euclidean projection onto B. Clip at delta; if the sum constraint is then
/// violated, shift by the unique mu > 0 with sum max(delta, y_i - mu) = m.
inline Vector project_feasible(const Vector& y, double delta) {
  const auto m = y.size();
  if (delta > 1.0) throw EmptySetError("polytope is empty for delta > 1");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  Vector clipped = y.cwiseMax(delta);
  if (clipped.sum() <= static_cast<double>(m)) return clipped;
  const double mu = detail::water_level(y, Vector::Constant(m, delta), static_cast<double>(m));
  return (y.array() - mu).max(delta).matrix();
}

/// Indices i in 0..m with |g_i(x)| <= tol. Throws if some g_i(x) < -tol.
inline std::vector<int> active_set(const Vector& x, double delta, double tol = 1e-9) {
  const Vector g = constraint_values(x, delta);
  std::vector<int> active;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] < -tol) {
      throw DomainError("point violates constraint g_" + std::to_string(i) + " by " + std::to_string(-g[i]));
    }
    if (g[i] <= tol) active.push_back(static_cast<int>(i));
  }
  return active;
}

/// Euclidean projection of v onto the tangent cone of B at x,
///   T(x) = { d : d_i >= 0 for active lower bounds, sum d <= 0 if g_0 active }.
/// Same water-filling structure as project_feasible with bounds 0 on the
/// active coordinates and target 0.
inline Vector project_tangent(const Vector& x, const Vector& v, double delta, double tol = 1e-9) {
  const auto m = x.size();
  if (v.size() != m) throw UsageError("tangent projection: dimension mismatch");
  const auto active = active_set(x, delta, tol);
  Vector lower = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  bool sum_active = false;
  for (int i : active) {
    if (i == 0) {
      sum_active = true;
    } else {
      lower[i - 1] = 0.0;
    }
  }
  Vector d = v.cwiseMax(lower);
  if (!sum_active || d.sum() <= 0.0) return d;
  const double mu = detail::water_level(v, lower, 0.0);
  return (v.array() - mu).max(lower.array()).matrix();
}

}  // namespace bertrand::geometry

#endif  // BERTRAND_GEOMETRY_HPP
