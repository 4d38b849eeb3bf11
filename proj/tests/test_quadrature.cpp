#include <cmath>

#include <gtest/gtest.h>

#include "bertrand/quadrature.hpp"

using namespace bertrand;

TEST(GaussLegendre, WeightsSumToTwo) {
  for (int n : {1, 2, 5, 8, 16, 33, 64}) {
    const auto& rule = quadrature::gauss_legendre(n);
    double s = 0.0;
    for (double w : rule.weights) s += w;
    EXPECT_NEAR(s, 2.0, 1e-13) << "order " << n;
  }
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
  for (int n : {1, 3, 8}) {
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      const double got = quadrature::integrate([&](double x) { return std::pow(x, deg); }, 0.0, 1.0, n);
      EXPECT_NEAR(got, 1.0 / (deg + 1), 1e-14) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(GaussLegendre, RejectsBadOrder) {
  EXPECT_THROW(quadrature::gauss_legendre(0), std::exception);
  EXPECT_THROW(quadrature::gauss_legendre(65), std::exception);
}

TEST(Integrate, SmoothFunction) {
  EXPECT_NEAR(quadrature::integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 16), 2.0, 1e-14);
  EXPECT_NEAR(quadrature::integrate_composite([](double x) { return std::exp(x); }, 0.0, 1.0, 8, 8),
              std::exp(1.0) - 1.0, 1e-14);
}

TEST(Integrate, PiecesHandleKinks) {
  auto f = [](double x) { return std::abs(x - 0.3); };
  EXPECT_NEAR(quadrature::integrate_pieces(f, {0.0, 0.3, 1.0}, 2), 0.5 * 0.09 + 0.5 * 0.49, 1e-15);
}
