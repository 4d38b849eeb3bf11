#ifndef BERTRAND_MODEL_HPP
#define BERTRAND_MODEL_HPP

// Bayesian Bertrand competition: cost priors, monotone piecewise-linear
// pricing strategies, the symmetric Bayes-Nash equilibrium and expected
// utility under all-or-nothing demand.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bertrand/common.hpp"
#include "bertrand/quadrature.hpp"

namespace bertrand::model {

/// Distribution of a firm's private marginal cost on [0, 1], shared by all
/// `n_firms` firms. The pdf is supplied alongside the cdf; it is never
/// obtained by differentiating the cdf numerically.
struct CostPrior {
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  int n_firms = 2;
  // Set by uniform(); enables closed forms.
  bool is_uniform = false;

  static CostPrior uniform(int n_firms = 2) {
    return CostPrior{[](double c) { return c; }, [](double) { return 1.0; }, n_firms, true};
  }

  /// F(c) = c^a for a > 0.
  static CostPrior power(double a, int n_firms = 2) {
    if (!(a > 0.0)) throw DomainError("power prior exponent must be positive");
    return CostPrior{[a](double c) { return std::pow(c, a); },
                     [a](double c) { return c > 0.0 ? a * std::pow(c, a - 1.0) : (a == 1.0 ? 1.0 : 0.0); },
                     n_firms, a == 1.0};
  }

  /// Distribution of the lowest competitor cost, H = 1 - (1 - F)^(n-1).
  double competitor_cdf(double c) const {
    return 1.0 - std::pow(1.0 - cdf(c), n_firms - 1);
  }

  /// h = H' = (n-1) (1 - F)^(n-2) f.
  double competitor_pdf(double c) const {
    return (n_firms - 1) * std::pow(1.0 - cdf(c), n_firms - 2) * pdf(c);
  }

  /// Throws DomainError when the cdf/pdf pair is not a distribution on [0, 1].
  void validate(double tol = 1e-8) const {
    if (!cdf || !pdf) throw DomainError("cost prior needs both cdf and pdf");
    if (n_firms < 2) throw DomainError("cost prior needs at least two firms");
    if (std::abs(cdf(0.0)) > 1e-12 || std::abs(cdf(1.0) - 1.0) > 1e-12) {
      throw DomainError("cost prior cdf must satisfy F(0)=0 and F(1)=1");
    }
    double prev = cdf(0.0);
    for (int k = 1; k <= 1000; ++k) {
      const double c = k / 1000.0;
      const double fc = cdf(c);
      if (fc < prev - 1e-14) throw DomainError("cost prior cdf is decreasing near c=" + std::to_string(c));
      if (pdf(c) < 0.0) throw DomainError("cost prior pdf is negative near c=" + std::to_string(c));
      prev = fc;
    }
    // Dyadic panels toward c = 0 so integrable singularities there (power
    // priors with exponent < 1) still resolve; the cdf covers [0, 2^-40].
    double mass = cdf(std::ldexp(1.0, -40));
    for (int k = 0; k < 40; ++k) {
      mass += quadrature::integrate(pdf, std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k), 16);
    }
    if (std::abs(mass - 1.0) > tol) {
      throw DomainError("cost prior pdf integrates to " + std::to_string(mass) + ", not 1");
    }
  }
};

/// Strictly increasing, continuous piecewise-linear map from costs [0, 1] to
/// prices, given by its values at sorted breakpoints 0 = b_0 < ... < b_K = 1.
/// Every piece has slope >= delta_min.
class PiecewiseLinearStrategy {
 public:
  PiecewiseLinearStrategy(std::vector<double> breakpoints, std::vector<double> node_values,
                          double delta_min = 0.0)
      : breakpoints_(std::move(breakpoints)), values_(std::move(node_values)), delta_min_(delta_min) {
    if (breakpoints_.size() < 2 || breakpoints_.size() != values_.size()) {
      throw DomainError("strategy needs matching breakpoints and node values (at least two)");
    }
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0) {
      throw DomainError("strategy breakpoints must start at 0 and end at 1");
    }
    if (delta_min_ < 0.0) throw DomainError("strategy delta_min must be nonnegative");
    slopes_.resize(breakpoints_.size() - 1);
    for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
      const double width = breakpoints_[k + 1] - breakpoints_[k];
      if (!(width > 0.0)) throw DomainError("strategy breakpoints must be strictly increasing");
      slopes_[k] = (values_[k + 1] - values_[k]) / width;
      if (!(slopes_[k] > 0.0) || slopes_[k] < delta_min_ * (1.0 - 1e-12) - 1e-15) {
        throw DomainError("strategy slope " + std::to_string(slopes_[k]) + " on piece " +
                          std::to_string(k) + " is below delta_min " + std::to_string(delta_min_));
      }
    }
  }

  /// Affine strategy c -> intercept + slope c.
  static PiecewiseLinearStrategy affine(double intercept, double slope, double delta_min = 0.0) {
    return {{0.0, 1.0}, {intercept, intercept + slope}, delta_min};
  }

  /// Marginal-cost pricing, beta(c) = c.
  static PiecewiseLinearStrategy identity() { return affine(0.0, 1.0, 1.0); }

  /// Symmetric equilibrium of the uniform duopoly, beta*(c) = (1 + c) / 2.
  static PiecewiseLinearStrategy uniform_bne() { return affine(0.5, 0.5, 0.5); }

  /// Strategy with the given slopes on consecutive pieces and beta(1) = right_value.
  static PiecewiseLinearStrategy from_slopes(const std::vector<double>& breakpoints,
                                             const std::vector<double>& slopes,
                                             double right_value = 1.0, double delta_min = 0.0) {
    if (slopes.size() + 1 != breakpoints.size()) {
      throw DomainError("from_slopes needs one slope per piece");
    }
    std::vector<double> values(breakpoints.size());
    values.back() = right_value;
    for (std::size_t k = slopes.size(); k-- > 0;) {
      values[k] = values[k + 1] - slopes[k] * (breakpoints[k + 1] - breakpoints[k]);
    }
    return {breakpoints, std::move(values), delta_min};
  }

  double operator()(double c) const { return value(c); }

  /// Price at cost c (piecewise-linear interpolation of the node values).
  double value(double c) const {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("cost " + std::to_string(c) + " outside [0, 1]");
    const std::size_t k = piece_index(c);
    return values_[k] + slopes_[k] * (c - breakpoints_[k]);
  }

  /// The unique cost c with value(c) == p.
  double inverse(double p) const {
    if (!(p >= values_.front() && p <= values_.back())) {
      throw RangeError("price " + std::to_string(p) + " outside strategy range [" +
                       std::to_string(values_.front()) + ", " + std::to_string(values_.back()) + "]");
    }
    auto it = std::upper_bound(values_.begin(), values_.end(), p);
    std::size_t k = static_cast<std::size_t>(it - values_.begin());
    k = (k == 0) ? 0 : std::min(k - 1, slopes_.size() - 1);
    const double c = breakpoints_[k] + (p - values_[k]) / slopes_[k];
    return std::clamp(c, breakpoints_[k], breakpoints_[k + 1]);
  }

  /// Index of the piece containing c; right-continuous, the last piece owns c = 1.
  std::size_t piece_index(double c) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), c);
    const std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin());
    return (k == 0) ? 0 : std::min(k - 1, slopes_.size() - 1);
  }

  double slope_at(double c) const { return slopes_[piece_index(c)]; }

  double min_slope() const { return *std::min_element(slopes_.begin(), slopes_.end()); }

  /// In the admissible set: range within [0, 1], beta(1) = 1, slopes >= delta.
  bool is_admissible(double delta, double tol = 1e-12) const {
    return values_.front() >= -tol && std::abs(values_.back() - 1.0) <= tol &&
           min_slope() >= delta - tol;
  }

  /// Same function on a finer set of breakpoints (must contain the current ones).
  PiecewiseLinearStrategy refined(std::vector<double> extra) const {
    extra.insert(extra.end(), breakpoints_.begin(), breakpoints_.end());
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    std::vector<double> vals;
    vals.reserve(extra.size());
    for (double b : extra) vals.push_back(value(b));
    return {std::move(extra), std::move(vals), delta_min_};
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& node_values() const { return values_; }
  const std::vector<double>& slopes() const { return slopes_; }
  double delta_min() const { return delta_min_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  double delta_min_;
};

inline double eval_strategy(const PiecewiseLinearStrategy& s, double c) { return s.value(c); }

inline double invert_strategy(const PiecewiseLinearStrategy& s, double p) { return s.inverse(p); }

/// beta*(c) = (1 / (1 - H(c))) * integral_c^1 z h(z) dz, always by quadrature.
inline double bne_quadrature(const CostPrior& prior, double c, int panels = 16, int order = 16) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("cost " + std::to_string(c) + " outside [0, 1]");
  if (c == 1.0) return 1.0;
  const double survival = 1.0 - prior.competitor_cdf(c);
  if (!(survival > 1e-15)) {
    throw SingularPriorError("H(c) = 1 at c = " + std::to_string(c) + " < 1");
  }
  const double integral = quadrature::integrate_composite(
      [&](double z) { return z * prior.competitor_pdf(z); }, c, 1.0, panels, order);
  return integral / survival;
}

/// Symmetric Bayes-Nash equilibrium price at cost c. Closed form for the
/// uniform duopoly, quadrature otherwise; beta*(1) = 1 by continuity.
inline double bne(const CostPrior& prior, double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("cost " + std::to_string(c) + " outside [0, 1]");
  if (c == 1.0) return 1.0;
  if (prior.is_uniform && prior.n_firms == 2) return 0.5 * (1.0 + c);
  return bne_quadrature(prior, c);
}

namespace detail {

// Costs in [0, 1] at which s(c) crosses one of opp's node values.
inline std::vector<double> crossing_splits(const PiecewiseLinearStrategy& s,
                                           const PiecewiseLinearStrategy& opp) {
  std::vector<double> splits = s.breakpoints();
  const double lo = s.node_values().front();
  const double hi = s.node_values().back();
  for (double p : opp.node_values()) {
    if (p > lo && p < hi) splits.push_back(s.inverse(p));
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());
  return splits;
}

}  // namespace detail

/// Probability that price p undercuts every opponent playing `opp`. Ties lose.
inline double win_probability(double p, const PiecewiseLinearStrategy& opp, const CostPrior& prior) {
  if (p < opp.node_values().front()) return 1.0;
  if (p >= opp.node_values().back()) return 0.0;
  return 1.0 - prior.competitor_cdf(opp.inverse(p));
}

/// Ex-ante expected profit of a firm playing s against opponents playing opp
/// under all-or-nothing demand: integral of (s(c) - c) P(win | c) dF(c).
inline double expected_utility(const PiecewiseLinearStrategy& s, const PiecewiseLinearStrategy& opp,
                               const CostPrior& prior, int order = 16) {
  const auto splits = detail::crossing_splits(s, opp);
  auto integrand = [&](double c) {
    const double p = s.value(c);
    return (p - c) * win_probability(p, opp, prior) * prior.pdf(c);
  };
  return quadrature::integrate_pieces(integrand, splits, order);
}

}  // namespace bertrand::model

#endif  // BERTRAND_MODEL_HPP
