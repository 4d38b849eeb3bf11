#ifndef BERTRAND_QUADRATURE_HPP
#define BERTRAND_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "bertrand/common.hpp"

namespace bertrand::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1]. An n-point rule integrates
/// polynomials of degree <= 2n-1 exactly.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxOrder = 64;

namespace detail {

inline GaussLegendre build_rule(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Rule of the given order (1..kMaxOrder). Rules are built once, on first use.
inline const GaussLegendre& gauss_legendre(int order) {
  static const std::array<GaussLegendre, kMaxOrder + 1> rules = [] {
    std::array<GaussLegendre, kMaxOrder + 1> r;
    for (int n = 1; n <= kMaxOrder; ++n) r[n] = detail::build_rule(n);
    return r;
  }();
  if (order < 1 || order > kMaxOrder) {
    throw UsageError("Gauss-Legendre order must be in [1, 64]");
  }
  return rules[order];
}

/// Integral of f over [a, b] with a single Gauss-Legendre panel.
template <typename F>
double integrate(F&& f, double a, double b, int order = 16) {
  if (b <= a) return 0.0;
  const auto& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return sum * half;
}

/// Integral over [a, b] split into `panels` equal panels.
template <typename F>
double integrate_composite(F&& f, double a, double b, int panels, int order = 16) {
  if (b <= a) return 0.0;
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == panels) ? b : lo + width;
    sum += integrate(f, lo, hi, order);
  }
  return sum;
}

/// Integral over consecutive intervals of a sorted list of split points.
template <typename F>
double integrate_pieces(F&& f, const std::vector<double>& splits, int order = 16) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < splits.size(); ++k) {
    sum += integrate(f, splits[k], splits[k + 1], order);
  }
  return sum;
}

}  // namespace bertrand::quadrature

#endif  // BERTRAND_QUADRATURE_HPP
