#ifndef BERTRAND_VARIATIONAL_HPP
#define BERTRAND_VARIATIONAL_HPP

// Directional (Gateaux) derivatives of the expected utility and the Minty
// variational inequality for the uniform duopoly.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bertrand/common.hpp"
#include "bertrand/model.hpp"
#include "bertrand/quadrature.hpp"

namespace bertrand::variational {

using model::CostPrior;
using model::PiecewiseLinearStrategy;

/// Continuous piecewise-linear perturbation direction on [0, 1]. Unlike a
/// strategy it carries no monotonicity requirement.
class Direction {
 public:
  Direction(std::vector<double> breakpoints, std::vector<double> node_values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(node_values)) {
    if (breakpoints_.size() < 2 || breakpoints_.size() != values_.size()) {
      throw DomainError("direction needs matching breakpoints and node values (at least two)");
    }
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
      throw DomainError("direction breakpoints must start at 0 and end at 1");
    }
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
      if (!(breakpoints_[k + 1] > breakpoints_[k])) {
        throw DomainError("direction breakpoints must be strictly increasing");
      }
    }
  }

  static Direction constant(double v) { return {{0.0, 1.0}, {v, v}}; }

  static Direction from_strategy(const PiecewiseLinearStrategy& s) {
    return {s.breakpoints(), s.node_values()};
  }

  /// a - b on the union of both breakpoint sets.
  static Direction difference(const PiecewiseLinearStrategy& a, const PiecewiseLinearStrategy& b) {
    auto bps = merged(a.breakpoints(), b.breakpoints());
    std::vector<double> vals;
    vals.reserve(bps.size());
    for (double c : bps) vals.push_back(a.value(c) - b.value(c));
    return {std::move(bps), std::move(vals)};
  }

  double operator()(double c) const { return value(c); }

  double value(double c) const {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("cost " + std::to_string(c) + " outside [0, 1]");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), c);
    std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
    k = (k == 0) ? 0 : std::min(k - 1, breakpoints_.size() - 2);
    const double t = (c - breakpoints_[k]) / (breakpoints_[k + 1] - breakpoints_[k]);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& node_values() const { return values_; }

  static std::vector<double> merged(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// s + eps * d. Throws PreconditionError if the result is not strictly increasing.
inline PiecewiseLinearStrategy perturb(const PiecewiseLinearStrategy& s, const Direction& d, double eps) {
  auto bps = Direction::merged(s.breakpoints(), d.breakpoints());
  std::vector<double> vals;
  vals.reserve(bps.size());
  for (double c : bps) vals.push_back(s.value(c) + eps * d.value(c));
  for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
    if (!(vals[k + 1] > vals[k])) {
      throw PreconditionError("perturbed strategy is not strictly increasing near c=" +
                              std::to_string(bps[k]));
    }
  }
  return {std::move(bps), std::move(vals), 0.0};
}

/// Closed-form Gateaux derivative DU(s, opp)[d].
///
/// Where opp(0) < s(c) < opp(1) the integrand is
///   d(c) (1 - (s(c) - c) h(z) / opp'(z) - H(z)) f(c),  z = opp^{-1}(s(c)).
/// Below opp(0) the firm wins for sure and the integrand is d(c) f(c); above
/// opp(1) it never wins and the integrand vanishes.
inline double gateaux_closed(const PiecewiseLinearStrategy& s, const PiecewiseLinearStrategy& opp,
                             const Direction& d, const CostPrior& prior, int order = 16) {
  if (!(opp.delta_min() > 0.0)) {
    throw PreconditionError("opponent strategy needs a positive slope lower bound delta_min");
  }
  auto splits = Direction::merged(model::detail::crossing_splits(s, opp), d.breakpoints());
  const double lo = opp.node_values().front();
  const double hi = opp.node_values().back();
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < splits.size(); ++k) {
    const double a = splits[k];
    const double b = splits[k + 1];
    const double p_mid = s.value(0.5 * (a + b));
    if (p_mid >= hi) continue;
    if (p_mid < lo) {
      total += quadrature::integrate([&](double c) { return d.value(c) * prior.pdf(c); }, a, b, order);
      continue;
    }
    // opp^{-1}(s(c)) stays inside one opponent piece on (a, b).
    const double opp_slope = opp.slope_at(opp.inverse(p_mid));
    total += quadrature::integrate(
        [&](double c) {
          const double p = s.value(c);
          const double z = opp.inverse(std::clamp(p, lo, hi));
          const double bracket = 1.0 - (p - c) * prior.competitor_pdf(z) / opp_slope - prior.competitor_cdf(z);
          return d.value(c) * bracket * prior.pdf(c);
        },
        a, b, order);
  }
  return total;
}

/// Difference-quotient Gateaux derivative (U(s + eps d, opp) - U(s, opp)) / eps,
/// optionally improved by one Richardson step with eps / 2.
inline double gateaux_fd(const PiecewiseLinearStrategy& s, const PiecewiseLinearStrategy& opp,
                         const Direction& d, const CostPrior& prior, double eps = 1e-5,
                         bool richardson = true) {
  if (!(eps > 0.0)) throw UsageError("eps must be positive");
  const double base = model::expected_utility(s, opp, prior);
  auto quotient = [&](double h) {
    return (model::expected_utility(perturb(s, d, h), opp, prior) - base) / h;
  };
  const double coarse = quotient(eps);
  if (!richardson) return coarse;
  return 2.0 * quotient(0.5 * eps) - coarse;
}

/// Left side of the Minty inequality in the uniform duopoly,
///   integral_0^1 (s - beta*)(1 - c - (s - c) / s') dc.
/// The integrand is polynomial on every piece so order 8 is exact.
inline double minty_lhs(const PiecewiseLinearStrategy& s, const PiecewiseLinearStrategy& bne) {
  const auto splits = Direction::merged(s.breakpoints(), bne.breakpoints());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < splits.size(); ++k) {
    const double slope = s.slope_at(0.5 * (splits[k] + splits[k + 1]));
    total += quadrature::integrate(
        [&](double c) {
          const double p = s.value(c);
          return (p - bne.value(c)) * (1.0 - c - (p - c) / slope);
        },
        splits[k], splits[k + 1], 8);
  }
  return total;
}

/// Three-piece strategy with slopes 1/5, 4/5, 1/2 on [0, 1/(k+2)),
/// [1/(k+2), 2/(k+2)) and [2/(k+2), 1]. It violates the Minty inequality and
/// agrees with beta* beyond 2/(k+2), so it approaches beta* as k grows.
inline PiecewiseLinearStrategy minty_counterexample(int k) {
  if (k < 0) throw DomainError("counterexample index k must be nonnegative");
  const double first = 1.0 / (k + 2);
  const double second = 2.0 / (k + 2);
  std::vector<double> bps{0.0, first};
  std::vector<double> vals{0.5, 0.5 + first / 5.0};
  if (second < 1.0) {
    bps.push_back(second);
    vals.push_back(0.5 * (1.0 + second));
  }
  bps.push_back(1.0);
  vals.push_back(1.0);
  return {std::move(bps), std::move(vals), 0.2};
}

}  // namespace bertrand::variational

#endif  // BERTRAND_VARIATIONAL_HPP
