#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bertrand/parametric.hpp"
#include "oracles.hpp"

using namespace bertrand;
using parametric::FeasibleParams;
using parametric::GradientMode;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

using oracle::random_feasible;

// Direct evaluation of the gradient formula with an independent composite
// rule: v_i = sum_{j<i} (1/m) int_j k_j + int_i (i/m - c) k_i.
Vector gradient_oracle(const Vector& x) {
  const int m = static_cast<int>(x.size());
  auto price = [&](int j, double c) {
    double tail = 0.0;
    for (int k = j; k < m; ++k) tail += x[k];
    return x[j] * (c - static_cast<double>(j) / m) + 1.0 - tail / m;
  };
  auto kfun = [&](int j, double c) { return (price(j, c) - c) / x[j] - (1.0 - c); };
  auto simpson = [](auto f, double a, double b) {
    const int n = 200;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  Vector v = Vector::Zero(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      v[i] += simpson([&](double c) { return kfun(j, c); }, double(j) / m, double(j + 1) / m) / m;
    }
    v[i] += simpson([&](double c) { return (double(i + 1) / m - c) * kfun(i, c); }, double(i) / m, double(i + 1) / m);
  }
  return v;
}

}  // namespace

TEST(FeasibleParams, ConstraintsAndIntercept) {
  const FeasibleParams fp(vec({0.5, 0.5}), 0.1);
  EXPECT_TRUE(fp.feasible());
  EXPECT_DOUBLE_EQ(fp.intercept(), 0.5);
  const FeasibleParams bad(vec({0.05, 2.0}), 0.1);
  EXPECT_EQ(bad.violated(), (std::vector<int>{0, 1}));
  try {
    bad.require_feasible();
    FAIL();
  } catch (const ConstraintViolation& e) {
    EXPECT_EQ(e.violated_constraints, (std::vector<int>{0, 1}));
  }
  EXPECT_THROW(FeasibleParams(vec({1.0}), 0.0), DomainError);
  EXPECT_THROW(FeasibleParams(vec({1.0}), 1.5), DomainError);
}

TEST(FeasibleParams, InterceptRange) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 6;
    const FeasibleParams fp(random_feasible(rng, m, 0.1), 0.1);
    EXPECT_GE(fp.intercept(), -1e-15);
    EXPECT_LE(fp.intercept(), 0.9 + 1e-15);
  }
}

TEST(StrategyFromParams, Examples) {
  const auto bne = parametric::strategy_from_params(FeasibleParams(vec({0.5, 0.5}), 0.1));
  for (double c : {0.0, 0.3, 0.5, 0.9, 1.0}) EXPECT_NEAR(bne.value(c), 0.5 * (1.0 + c), 1e-15);
  const auto id = parametric::strategy_from_params(FeasibleParams(vec({1.0, 1.0}), 0.1));
  for (double c : {0.0, 0.3, 0.5, 0.9, 1.0}) EXPECT_NEAR(id.value(c), c, 1e-15);
  const auto one = parametric::strategy_from_params(FeasibleParams(vec({0.3}), 0.1));
  for (double c : {0.0, 0.4, 1.0}) EXPECT_NEAR(one.value(c), 1.0 - 0.3 + 0.3 * c, 1e-15);
  EXPECT_THROW(parametric::strategy_from_params(FeasibleParams(vec({1.5, 1.5}), 0.1)), ConstraintViolation);
}

TEST(StrategyFromParams, PiecePrices) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 5;
    const Vector x = random_feasible(rng, m, 0.1);
    const auto s = parametric::strategy_from_params(FeasibleParams(x, 0.1));
    EXPECT_DOUBLE_EQ(s.value(1.0), 1.0);
    for (int j = 0; j < m; ++j) {
      const double c = (j + 0.3) / m;
      EXPECT_NEAR(s.value(c), parametric::piece_price(x, j, c, x.tail(m - j).sum()), 1e-14);
    }
  }
}

TEST(SymmetricUtility, Values) {
  for (int m : {1, 2, 5}) {
    EXPECT_NEAR(parametric::symmetric_utility(FeasibleParams(parametric::equilibrium_params(m), 0.1)), 1.0 / 6.0,
                1e-14);
    EXPECT_NEAR(parametric::symmetric_utility(FeasibleParams(Vector::Ones(m), 0.1)), 0.0, 1e-15);
  }
}

TEST(SymmetricUtility, MatchesModelUtility) {
  std::mt19937_64 rng(3);
  const auto prior = model::CostPrior::uniform();
  for (int t = 0; t < 30; ++t) {
    const FeasibleParams fp(random_feasible(rng, 1 + t % 6, 0.1), 0.1);
    const auto s = parametric::strategy_from_params(fp);
    EXPECT_NEAR(parametric::symmetric_utility(fp), model::expected_utility(s, s, prior), 1e-10);
  }
}

TEST(GameGradient, ClosedFormExamples) {
  const auto v = parametric::game_gradient(vec({1.0, 1.0}), parametric::AllOrNothing{}, GradientMode::closed_m2);
  EXPECT_NEAR(v[0], -5.0 / 48, 1e-15);
  EXPECT_NEAR(v[1], -11.0 / 48, 1e-15);
  const auto w = parametric::game_gradient(vec({0.1, 0.1}), parametric::AllOrNothing{}, GradientMode::closed_m2);
  EXPECT_NEAR(w[0], 5.0 / 6, 1e-14);
  EXPECT_NEAR(w[1], 11.0 / 6, 1e-14);
  const auto z = parametric::game_gradient(vec({0.5, 0.5}), parametric::AllOrNothing{}, GradientMode::closed_m2);
  EXPECT_NEAR(z.norm(), 0.0, 1e-15);
  const auto one = parametric::game_gradient(vec({1.0}), parametric::AllOrNothing{}, GradientMode::closed_m1);
  EXPECT_NEAR(one[0], -1.0 / 3, 1e-15);
}

TEST(GameGradient, QuadratureMatchesIndependentRule) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_feasible(rng, 1 + t % 8, 0.1);
    EXPECT_LE((parametric::game_gradient(x) - gradient_oracle(x)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(GameGradient, StationaryAtEquilibrium) {
  for (int m = 1; m <= 16; ++m) {
    EXPECT_LE(parametric::game_gradient(parametric::equilibrium_params(m)).cwiseAbs().maxCoeff(), 1e-10) << m;
  }
}

TEST(GameGradient, ClosedFormMatchesQuadratureOnGrid) {
  const double delta = 0.1;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      Vector x(2);
      x << delta + (2.0 - 2 * delta) * i / 49, delta + (2.0 - 2 * delta) * j / 49;
      if (x.sum() > 2.0) continue;
      const auto q = parametric::game_gradient(x);
      const auto c = parametric::game_gradient(x, parametric::AllOrNothing{}, GradientMode::closed_m2);
      EXPECT_LE((q - c).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(GameGradient, UsageAndDomainErrors) {
  EXPECT_THROW(parametric::game_gradient(vec({1.0, 1.0, 1.0}), parametric::AllOrNothing{}, GradientMode::closed_m2),
               UsageError);
  EXPECT_THROW(parametric::game_gradient(vec({1.0, 1.0}), parametric::AllOrNothing{}, GradientMode::closed_m1),
               UsageError);
  EXPECT_THROW(parametric::game_gradient(vec({0.0, 1.0})), DomainError);
  const parametric::ProfitKernel linear{[](double p, double c) { return p - c; }, [](double, double) { return 1.0; }};
  EXPECT_THROW(parametric::game_gradient(vec({1.0, 1.0}), linear, GradientMode::closed_m2), UsageError);
  // The generic kernel with the all-or-nothing functions reproduces the default.
  EXPECT_LE((parametric::game_gradient(vec({0.7, 0.9}), linear) - parametric::game_gradient(vec({0.7, 0.9})))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
}

TEST(GameGradient, FiniteDifferenceExamples) {
  const auto v = parametric::game_gradient_fd(FeasibleParams(vec({1.0, 1.0}), 0.1));
  EXPECT_NEAR(v[0], -5.0 / 48, 1e-3);
  EXPECT_NEAR(v[1], -11.0 / 48, 1e-3);
  for (int m : {1, 2, 3, 6}) {
    EXPECT_LE(parametric::game_gradient_fd(FeasibleParams(parametric::equilibrium_params(m), 0.1))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-3);
  }
  std::mt19937_64 rng(5);
  const Vector x = random_feasible(rng, 4, 0.1);
  EXPECT_LE((parametric::game_gradient_fd(FeasibleParams(x, 0.1)) - parametric::game_gradient(x)).cwiseAbs().maxCoeff(),
            1e-3);
}

TEST(GameGradient, FiniteDifferenceIsFirstOrder) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    const Vector x = random_feasible(rng, 2 + t % 3, 0.1);
    const Vector exact = parametric::game_gradient(x);
    const double e1 = (parametric::game_gradient_fd(FeasibleParams(x, 0.1), 1e-2) - exact).norm();
    const double e2 = (parametric::game_gradient_fd(FeasibleParams(x, 0.1), 1e-4) - exact).norm();
    const double slope = std::log10(e1 / e2) / 2.0;
    EXPECT_NEAR(slope, 1.0, 0.2);
  }
}

TEST(GameField, PicksClosedFormForSmallM) {
  const parametric::GameField<> f2(2), f5(5);
  EXPECT_EQ(f2.m(), 2);
  EXPECT_LE((f2(vec({0.3, 1.2})) - parametric::game_gradient(vec({0.3, 1.2}))).norm(), 1e-12);
  const Vector x = Vector::Constant(5, 0.8);
  EXPECT_EQ(f5(x), parametric::game_gradient(x));
  EXPECT_THROW(parametric::GameField<>(0), UsageError);
}
