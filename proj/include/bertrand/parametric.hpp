#ifndef BERTRAND_PARAMETRIC_HPP
#define BERTRAND_PARAMETRIC_HPP

// Finite-dimensional strategy space: strategies with m equal-width linear
// pieces parametrized by their slopes x_1..x_m, the right endpoint pinned at
// beta(1) = 1. Houses the symmetric game gradient v(x).

#include <cmath>
#include <concepts>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bertrand/common.hpp"
#include "bertrand/model.hpp"
#include "bertrand/quadrature.hpp"

namespace bertrand::parametric {

/// Slope vector x together with the polytope it must live in:
///   g_0(x) = m - sum_k x_k >= 0,   g_i(x) = x_i - delta >= 0.
struct FeasibleParams {
  int m = 0;
  double delta = 0.1;
  Vector x;

  FeasibleParams(Vector slopes, double delta_)
      : m(static_cast<int>(slopes.size())), delta(delta_), x(std::move(slopes)) {
    if (m < 1) throw DomainError("parameter vector must have at least one slope");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
  }

  /// Intercept beta(0) = 1 - sum(x) / m.
  double intercept() const { return 1.0 - x.sum() / m; }

  /// Indices i with g_i(x) < -tol.
  std::vector<int> violated(double tol = 1e-12) const {
    std::vector<int> out;
    if (m - x.sum() < -tol) out.push_back(0);
    for (int i = 0; i < m; ++i) {
      if (x[i] - delta < -tol) out.push_back(i + 1);
    }
    return out;
  }

  bool feasible(double tol = 1e-12) const { return violated(tol).empty(); }

  void require_feasible(double tol = 1e-12) const {
    auto bad = violated(tol);
    if (bad.empty()) return;
    std::ostringstream msg;
    msg << "infeasible slope vector, violated constraints:";
    for (int i : bad) msg << " g_" << i;
    throw ConstraintViolation(msg.str(), std::move(bad));
  }
};

/// Equilibrium slopes (1/2, ..., 1/2) of the uniform duopoly.
inline Vector equilibrium_params(int m) { return Vector::Constant(m, 0.5); }

/// Profit kernel Pi(p, c) and its price derivative.
template <typename K>
concept ProfitKernelLike = requires(const K& k, double p, double c) {
  { k.value(p, c) } -> std::convertible_to<double>;
  { k.price_derivative(p, c) } -> std::convertible_to<double>;
};

/// All-or-nothing demand: Pi(p, c) = p - c.
struct AllOrNothing {
  static constexpr bool is_all_or_nothing = true;
  double value(double p, double c) const { return p - c; }
  double price_derivative(double, double) const { return 1.0; }
};

/// Type-erased kernel for user-supplied demand models.
struct ProfitKernel {
  static constexpr bool is_all_or_nothing = false;
  std::function<double(double, double)> value_fn;
  std::function<double(double, double)> price_derivative_fn;
  double value(double p, double c) const { return value_fn(p, c); }
  double price_derivative(double p, double c) const { return price_derivative_fn(p, c); }
};

template <typename K>
constexpr bool is_all_or_nothing_v = requires { requires K::is_all_or_nothing; };

/// Price on piece j (0-based) at cost c:
///   p_j(x, c) = x_j (c - j/m) + 1 - (1/m) sum_{k >= j} x_k.
inline double piece_price(const Vector& x, int j, double c, double tail_sum) {
  const int m = static_cast<int>(x.size());
  return x[j] * (c - static_cast<double>(j) / m) + 1.0 - tail_sum / m;
}

namespace detail {

// Strategy with slopes x on the uniform m-piece grid and beta(1) = 1. Only
// slope positivity is checked.
inline model::PiecewiseLinearStrategy slopes_strategy(const Vector& x, double delta_min) {
  const int m = static_cast<int>(x.size());
  std::vector<double> bps(m + 1), vals(m + 1);
  vals[m] = 1.0;
  double tail = 0.0;
  for (int k = m; k-- > 0;) {
    tail += x[k];
    vals[k] = 1.0 - tail / m;
  }
  for (int k = 0; k < m; ++k) bps[k] = static_cast<double>(k) / m;
  bps[m] = 1.0;
  return {std::move(bps), std::move(vals), delta_min};
}

}  // namespace detail

inline model::PiecewiseLinearStrategy strategy_from_params(const FeasibleParams& fp) {
  fp.require_feasible();
  return detail::slopes_strategy(fp.x, fp.delta);
}

/// u(x) = sum_j integral over piece j of Pi(p_j(x, c), c) (1 - c) dc, the
/// symmetric-profile utility in the uniform duopoly.
template <ProfitKernelLike K = AllOrNothing>
double symmetric_utility(const FeasibleParams& fp, const K& kernel = {}, int order = 8) {
  fp.require_feasible();
  const int m = fp.m;
  double total = 0.0;
  double tail = fp.x.sum();
  for (int j = 0; j < m; ++j) {
    const double a = static_cast<double>(j) / m;
    const double b = static_cast<double>(j + 1) / m;
    total += quadrature::integrate(
        [&](double c) { return kernel.value(piece_price(fp.x, j, c, tail), c) * (1.0 - c); }, a, b, order);
    tail -= fp.x[j];
  }
  return total;
}

enum class GradientMode { quadrature, closed_m1, closed_m2 };

/// Closed-form field for m = 2 under all-or-nothing demand.
inline Vector closed_form_m2(double x1, double x2) {
  Vector v(2);
  v[0] = -7.0 / 48.0 - 3.0 * x2 / (48.0 * x1) + 5.0 / (48.0 * x1);
  v[1] = -1.0 / 3.0 - x2 / (8.0 * x1) + 3.0 / (16.0 * x1) + 1.0 / (24.0 * x2);
  return v;
}

/// Closed-form field for m = 1 under all-or-nothing demand.
inline double closed_form_m1(double x1) { return (1.0 - 2.0 * x1) / (3.0 * x1); }

/// Symmetric game gradient v(x) in the uniform duopoly:
///   v_i = sum_{j<i} (1/m) I_j + integral over piece i of (i/m - c) k_i(c) dc,
///   k_j(c) = Pi(p_j, c) / x_j - (1 - c) dPi/dp(p_j, c),  I_j = integral of k_j over piece j.
/// Only slope positivity is required here; feasibility is the caller's concern.
template <ProfitKernelLike K = AllOrNothing>
Vector game_gradient(const Vector& x, const K& kernel = {}, GradientMode mode = GradientMode::quadrature,
                     int order = 8) {
  const int m = static_cast<int>(x.size());
  if (m < 1) throw UsageError("game gradient needs at least one slope");
  for (int i = 0; i < m; ++i) {
    if (!(x[i] > 0.0)) throw DomainError("game gradient needs positive slopes (division by x_i)");
  }
  if (mode == GradientMode::closed_m2 || mode == GradientMode::closed_m1) {
    const int needed = mode == GradientMode::closed_m2 ? 2 : 1;
    if (m != needed) throw UsageError("closed-form gradient mode does not match m = " + std::to_string(m));
    if constexpr (!is_all_or_nothing_v<K>) {
      throw UsageError("closed-form gradient requires the all-or-nothing kernel");
    } else if (mode == GradientMode::closed_m2) {
      return closed_form_m2(x[0], x[1]);
    } else {
      return Vector::Constant(1, closed_form_m1(x[0]));
    }
  }
  Vector v(m);
  double tail = x.sum();
  double preceding = 0.0;  // sum_{j<i} (1/m) I_j
  for (int j = 0; j < m; ++j) {
    const double a = static_cast<double>(j) / m;
    const double b = static_cast<double>(j + 1) / m;
    const double xj = x[j];
    auto k = [&](double c) {
      const double p = piece_price(x, j, c, tail);
      return kernel.value(p, c) / xj - (1.0 - c) * kernel.price_derivative(p, c);
    };
    v[j] = preceding + quadrature::integrate([&](double c) { return (b - c) * k(c); }, a, b, order);
    preceding += quadrature::integrate(k, a, b, order) / m;
    tail -= xj;
  }
  return v;
}

template <ProfitKernelLike K = AllOrNothing>
Vector game_gradient(const FeasibleParams& fp, const K& kernel = {}, GradientMode mode = GradientMode::quadrature,
                     int order = 8) {
  return game_gradient(fp.x, kernel, mode, order);
}

/// Expected utility of a deviation to slopes `own` against opponents at `opp`.
/// Only all-or-nothing demand is modelled by model::expected_utility.
inline double asymmetric_utility(const Vector& own, const Vector& opp, double delta) {
  const auto prior = model::CostPrior::uniform(2);
  return model::expected_utility(strategy_from_params(FeasibleParams(own, delta)),
                                 strategy_from_params(FeasibleParams(opp, delta)), prior);
}

/// One-sided finite-difference gradient: perturb one player's slope x_i by
/// eps with the opponent held at x.
inline Vector game_gradient_fd(const FeasibleParams& fp, double eps = 1e-5) {
  fp.require_feasible();
  if (!(eps > 0.0)) throw UsageError("eps must be positive");
  const int m = fp.m;
  const auto prior = model::CostPrior::uniform(2);
  const auto opp = strategy_from_params(fp);
  const double base = model::expected_utility(opp, opp, prior);
  Vector v(m);
  for (int i = 0; i < m; ++i) {
    Vector shifted = fp.x;
    shifted[i] += eps;
    // The perturbed slopes may leave the sum constraint; only monotonicity matters.
    if (!(shifted[i] > 0.0)) throw PreconditionError("finite-difference perturbation is not monotone");
    const auto dev = detail::slopes_strategy(shifted, 0.0);
    v[i] = (model::expected_utility(dev, opp, prior) - base) / eps;
  }
  return v;
}

template <ProfitKernelLike K>
Vector game_gradient_fd(const FeasibleParams& fp, const K&, double eps = 1e-5) {
  static_assert(is_all_or_nothing_v<K>, "finite-difference gradient is only available for all-or-nothing demand");
  return game_gradient_fd(fp, eps);
}

/// The field x -> v(x) as a reusable callable. Picks the closed form for the
/// all-or-nothing kernel when m <= 2, quadrature otherwise.
template <ProfitKernelLike K = AllOrNothing>
class GameField {
 public:
  explicit GameField(int m, K kernel = {}) : m_(m), kernel_(std::move(kernel)) {
    if (m < 1) throw UsageError("game field needs m >= 1");
  }

  Vector operator()(const Vector& x) const {
    if constexpr (is_all_or_nothing_v<K>) {
      if (m_ == 2) return game_gradient(x, kernel_, GradientMode::closed_m2);
      if (m_ == 1) return game_gradient(x, kernel_, GradientMode::closed_m1);
    }
    return game_gradient(x, kernel_, GradientMode::quadrature);
  }

  int m() const { return m_; }
  const K& kernel() const { return kernel_; }

 private:
  int m_;
  K kernel_;
};

}  // namespace bertrand::parametric

#endif  // BERTRAND_PARAMETRIC_HPP
