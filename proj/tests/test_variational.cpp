#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bertrand/variational.hpp"

using namespace bertrand;
using model::CostPrior;
using model::PiecewiseLinearStrategy;
using variational::Direction;

namespace {

PiecewiseLinearStrategy random_strategy(std::mt19937_64& rng, int pieces, double lo, double hi) {
  std::uniform_real_distribution<double> slope(lo, hi);
  std::vector<double> bps, slopes;
  for (int k = 0; k <= pieces; ++k) bps.push_back(static_cast<double>(k) / pieces);
  for (int k = 0; k < pieces; ++k) slopes.push_back(slope(rng));
  return PiecewiseLinearStrategy::from_slopes(bps, slopes, 1.0, lo);
}

Direction random_direction(std::mt19937_64& rng, int pieces) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<double> bps, vals;
  for (int k = 0; k <= pieces; ++k) {
    bps.push_back(static_cast<double>(k) / pieces);
    vals.push_back(val(rng));
  }
  return {bps, vals};
}

// Minty left side of the k-th counterexample by exact rational arithmetic.
constexpr double kMintyValues[] = {3.0 / 320, 13.0 / 1440, 33.0 / 5120, 93.0 / 20000, 1.0 / 288, 3.0 / 1120,
                                   87.0 / 40960};

}  // namespace

TEST(Direction, Basics) {
  const Direction d({0.0, 0.5, 1.0}, {1.0, -1.0, 0.0});
  EXPECT_DOUBLE_EQ(d.value(0.25), 0.0);
  EXPECT_DOUBLE_EQ(d.sup_norm(), 1.0);
  EXPECT_THROW(Direction({0.0, 0.7}, {1.0, 1.0}), DomainError);
  const auto diff = Direction::difference(PiecewiseLinearStrategy::identity(), PiecewiseLinearStrategy::uniform_bne());
  EXPECT_DOUBLE_EQ(diff.value(0.0), -0.5);
  EXPECT_DOUBLE_EQ(diff.value(1.0), 0.0);
}

TEST(Gateaux, VanishesAtEquilibrium) {
  const auto bne = PiecewiseLinearStrategy::uniform_bne();
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    EXPECT_NEAR(variational::gateaux_closed(bne, bne, random_direction(rng, 1 + t % 6), CostPrior::uniform()), 0.0,
                1e-10);
  }
}

TEST(Gateaux, IdentityPricingConstantDirection) {
  const auto id = PiecewiseLinearStrategy::identity();
  EXPECT_NEAR(variational::gateaux_closed(id, id, Direction::constant(1.0), CostPrior::uniform()), 0.5, 1e-14);
}

TEST(Gateaux, CounterexampleAgainstItself) {
  const auto s = variational::minty_counterexample(0);
  const auto d = Direction::difference(s, PiecewiseLinearStrategy::uniform_bne());
  EXPECT_NEAR(variational::gateaux_closed(s, s, d, CostPrior::uniform()), 3.0 / 320, 1e-13);
}

TEST(Gateaux, SureWinRegionIsIncluded) {
  // s below opp(0) on part of [0, 1]: there the firm always wins and the
  // integrand is d(c) f(c).
  const auto s = PiecewiseLinearStrategy::affine(0.2, 0.8, 0.5);
  const auto opp = PiecewiseLinearStrategy::affine(0.6, 0.4, 0.4);
  const auto d = Direction::constant(1.0);
  const double closed = variational::gateaux_closed(s, opp, d, CostPrior::uniform());
  const double fd = variational::gateaux_fd(s, opp, d, CostPrior::uniform(), 1e-5);
  EXPECT_NEAR(closed, fd, 1e-8);
}

TEST(Gateaux, ClosedMatchesFiniteDifference) {
  // |closed - fd| <= C eps with eps = 1e-5 (Richardson-corrected) over random
  // triples; C = 1 was calibrated on 200 triples (worst observed ratio ~1e-3).
  constexpr double kC = 1.0;
  constexpr double kEps = 1e-5;
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_strategy(rng, 1 + t % 4, 0.2, 1.2);
    const auto opp = random_strategy(rng, 1 + (t / 4) % 4, 0.2, 1.2);
    const auto d = random_direction(rng, 1 + t % 5);
    for (const auto& prior : {CostPrior::uniform(), CostPrior::power(2.0)}) {
      const double closed = variational::gateaux_closed(s, opp, d, prior);
      const double fd = variational::gateaux_fd(s, opp, d, prior, kEps);
      EXPECT_LE(std::abs(closed - fd), kC * kEps) << "triple " << t;
    }
  }
}

TEST(Gateaux, FiniteDifferenceEdgeCases) {
  const auto bne = PiecewiseLinearStrategy::uniform_bne();
  EXPECT_NEAR(variational::gateaux_fd(bne, bne, Direction::constant(0.0), CostPrior::uniform()), 0.0, 1e-15);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    EXPECT_LE(std::abs(variational::gateaux_fd(bne, bne, random_direction(rng, 3), CostPrior::uniform(), 1e-4)),
              1e-3);
  }
  EXPECT_THROW(variational::gateaux_fd(bne, bne, Direction({0.0, 1.0}, {0.0, -10.0}), CostPrior::uniform(), 0.1),
               PreconditionError);
}

TEST(Gateaux, RequiresSlopeBound) {
  const PiecewiseLinearStrategy flat({0.0, 1.0}, {0.5, 1.0}, 0.0);
  EXPECT_THROW(variational::gateaux_closed(flat, flat, Direction::constant(1.0), CostPrior::uniform()),
               PreconditionError);
}

TEST(Minty, ReferenceValues) {
  const auto bne = PiecewiseLinearStrategy::uniform_bne();
  EXPECT_NEAR(variational::minty_lhs(bne, bne), 0.0, 1e-16);
  EXPECT_NEAR(variational::minty_lhs(PiecewiseLinearStrategy::identity(), bne), -1.0 / 6.0, 1e-15);
  for (int k = 0; k < 7; ++k) {
    EXPECT_NEAR(variational::minty_lhs(variational::minty_counterexample(k), bne), kMintyValues[k], 1e-13) << k;
  }
}

TEST(Minty, CounterexampleShape) {
  const auto s = variational::minty_counterexample(0);
  EXPECT_NEAR(s.value(0.25), 0.55, 1e-15);
  EXPECT_NEAR(s.value(0.5), 0.6, 1e-15);
  EXPECT_NEAR(s.value(0.75), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(s.value(1.0), 1.0);
  for (int k = 0; k < 10; ++k) {
    const auto sk = variational::minty_counterexample(k);
    EXPECT_TRUE(sk.is_admissible(0.2));
    EXPECT_DOUBLE_EQ(sk.value(1.0), 1.0);
  }
}

TEST(Minty, PositiveAndDecreasing) {
  const auto bne = PiecewiseLinearStrategy::uniform_bne();
  double prev = INFINITY;
  for (int k = 0; k <= 10; ++k) {
    const double v = variational::minty_lhs(variational::minty_counterexample(k), bne);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
}
