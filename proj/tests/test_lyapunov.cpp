#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bertrand/lyapunov.hpp"

using namespace bertrand;
using lyapunov::QuadraticCertificate;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix diag(double a, double b) {
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = a;
  H(1, 1) = b;
  return H;
}

const parametric::GameField<> kField2(2);

// The cubic written in e = x - x* coordinates, an independent expansion.
double cubic_in_e(double e1, double e2) {
  return -25.0 / 12 * e2 * e2 - 5.0 / 2 * e2 * e2 * e2 - 33.0 / 8 * e1 * e2 - 119.0 / 12 * e1 * e2 * e2 -
         91.0 / 24 * e1 * e1 - 91.0 / 12 * e1 * e1 * e2;
}

}  // namespace

TEST(Certificate, MakeValidates) {
  const auto c = QuadraticCertificate::make(diag(52, 20), vec({0.5, 0.5}), 0.05);
  EXPECT_DOUBLE_EQ(c.alpha_lower, 10.0);
  EXPECT_DOUBLE_EQ(c.alpha_upper, 26.0);
  Matrix asym = diag(1, 1);
  asym(0, 1) = 0.5;
  EXPECT_THROW(QuadraticCertificate::make(asym, vec({0.5, 0.5}), 1.0), DomainError);
  EXPECT_THROW(QuadraticCertificate::make(diag(1, -1), vec({0.5, 0.5}), 1.0), DomainError);
  EXPECT_THROW(QuadraticCertificate::make(diag(1, 1), vec({0.5, 0.5}), 0.0), DomainError);
  EXPECT_THROW(QuadraticCertificate::make(diag(1, 1), vec({0.5}), 1.0), UsageError);
}

TEST(Certificate, ValueAndGradient) {
  const auto c = lyapunov::reference_certificate(0.1);
  auto [v0, g0] = lyapunov::lyapunov_value_grad(c, vec({0.5, 0.5}));
  EXPECT_EQ(v0, 0.0);
  EXPECT_EQ(g0.norm(), 0.0);
  auto [v1, g1] = lyapunov::lyapunov_value_grad(c, vec({1.0, 1.0}));
  EXPECT_DOUBLE_EQ(v1, 9.0);
  EXPECT_EQ(g1, vec({26.0, 10.0}));
  auto [v2, g2] = lyapunov::lyapunov_value_grad(c, vec({0.6, 0.5}));
  EXPECT_NEAR(v2, 0.26, 1e-15);
  EXPECT_NEAR(g2[0], 5.2, 1e-14);
  EXPECT_EQ(g2[1], 0.0);
}

TEST(ReferenceDecomposition, LargestEigenvalue) {
  const auto d = lyapunov::reference_decomposition();
  EXPECT_LE(d.lambda_star, -0.231);
  EXPECT_NEAR(d.lambda_star, -0.2310650007, 1e-9);
  for (const auto& S : d.sigma) EXPECT_LT(lyapunov::largest_eigenvalue(S), 0.0);
  EXPECT_NEAR(lyapunov::reference_certificate(0.1).w, 0.2310650007 / 8 * 1.8, 1e-9);
}

TEST(ReferenceCertificate, PassesOnFineGrid) {
  const auto rep = lyapunov::verify_certificate(lyapunov::reference_certificate(0.1), 0.1, 200, kField2, 200);
  EXPECT_TRUE(rep.passed());
  EXPECT_GE(rep.decrease.margin, 0.0);
  EXPECT_EQ(rep.facet_points, 600u);
  EXPECT_TRUE(rep.warnings.empty());
  ASSERT_TRUE(rep.boundary_analytic.has_value());
  // Facet products are 52 (delta - 1/2), 20 (delta - 1/2) and -32 x1 - 4 on
  // x1 in [delta, 2 - delta]; the largest is -32 delta - 4 = -7.2.
  EXPECT_NEAR(*rep.boundary_analytic, 32 * 0.1 + 4.0, 1e-12);
}

TEST(ReferenceCertificate, FacetInnerProducts) {
  const auto c = lyapunov::reference_certificate(0.1);
  for (double t : {0.1, 0.7, 1.9}) {
    EXPECT_NEAR(c.gradient(vec({0.1, t})).dot(lyapunov::constraint_gradient(2, 1)), 52 * (0.1 - 0.5), 1e-12);
    EXPECT_NEAR(c.gradient(vec({t, 0.1})).dot(lyapunov::constraint_gradient(2, 2)), 20 * (0.1 - 0.5), 1e-12);
    EXPECT_NEAR(c.gradient(vec({t, 2.0 - t})).dot(lyapunov::constraint_gradient(2, 0)), -32 * t - 4, 1e-12);
  }
}

TEST(ReferenceCertificate, DecreaseAtIdentityPricing) {
  const auto c = lyapunov::reference_certificate(0.1);
  EXPECT_NEAR(c.gradient(vec({1.0, 1.0})).dot(kField2(vec({1.0, 1.0}))), -5.0, 1e-12);
}

TEST(Verify, BadCertificateFailsWithWitness) {
  const auto bad = QuadraticCertificate::make(diag(1, 1000), vec({0.5, 0.5}), 0.05);
  const auto rep = lyapunov::verify_certificate(bad, 0.1, 60, kField2);
  EXPECT_FALSE(rep.passed());
  EXPECT_LT(rep.decrease.margin, 0.0);
  ASSERT_TRUE(rep.decrease.witness.has_value());
  const Vector x = *rep.decrease.witness;
  EXPECT_GT(bad.gradient(x).dot(kField2(x)), -bad.w * (x - bad.x_star).squaredNorm());
}

TEST(Verify, WarnsAboveOneHalf) {
  const auto rep = lyapunov::verify_certificate(lyapunov::reference_certificate(0.6), 0.6, 20, kField2);
  EXPECT_FALSE(rep.warnings.empty());
}

TEST(Decomposition, CubicExpansionIsExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.9);
  const auto c = lyapunov::reference_certificate(0.1);
  int n = 0;
  while (n < 10000) {
    const Vector x = vec({u(rng), u(rng)});
    if (x.sum() > 2.0) continue;
    ++n;
    EXPECT_NEAR(lyapunov::scaled_rate(c, x), lyapunov::reference_cubic(x[0], x[1]), 1e-10);
    EXPECT_NEAR(lyapunov::reference_cubic(x[0], x[1]), cubic_in_e(x[0] - 0.5, x[1] - 0.5), 1e-12);
  }
  EXPECT_DOUBLE_EQ(lyapunov::reference_cubic(1.0, 1.0), -5.0);
  EXPECT_NEAR(lyapunov::reference_cubic(0.5, 0.5), 0.0, 1e-15);
}

TEST(Decomposition, PrintedMultipliersLeaveResidual) {
  const auto rep = lyapunov::decomposition_check(lyapunov::reference_decomposition(), 0.1);
  EXPECT_LE(rep.expansion_residual, 1e-10);
  EXPECT_GT(rep.decomposition_residual, 1.0);
  // At (1, 1): g_0 = 0 and g_1 = g_2 = 1 - delta.
  const auto d = lyapunov::reference_decomposition();
  const double rhs = lyapunov::decomposition_value(d, vec({1.0, 1.0}), vec({0.5, 0.5}), 0.1);
  const double sigma12 = 0.125 * (d.sigma[1].sum() + d.sigma[2].sum());
  EXPECT_NEAR(rhs, 0.9 * sigma12, 1e-12);
  EXPECT_GT(std::abs(rhs - (-5.0)), 0.1);
}

TEST(Decomposition, RederivedMultipliersAreExactAndNegative) {
  for (double delta : {0.05, 0.1, 0.25, 0.5}) {
    const auto d = lyapunov::rederive_sigmas(delta);
    EXPECT_LE(d.lambda_star, 0.0);
    EXPECT_GT(lyapunov::implied_rate(d.lambda_star, delta), 0.0);
    const auto rep = lyapunov::decomposition_check(d, delta, 100);
    EXPECT_LE(rep.decomposition_residual, 1e-10) << "delta " << delta;
    for (const auto& S : d.sigma) EXPECT_LE((S - S.transpose()).norm(), 0.0);
  }
}

TEST(Decomposition, RederivationRejectsBadMatrix) {
  EXPECT_THROW(lyapunov::rederive_sigmas(0.1, Matrix::Identity(3, 3)), UsageError);
}

TEST(Lp, ReferenceMatrixSatisfiesConstraints) {
  const auto lp = lyapunov::build_certificate_lp(2, 0.1, 0.05, 30, kField2);
  EXPECT_LE(lp.max_violation(diag(52, 20), 0.0), 0.0);
  EXPECT_GT(lp.decrease_rows, 400u);
  EXPECT_EQ(lp.boundary_rows, 90u);
  EXPECT_EQ(lp.unpack(lp.pack(diag(52, 20))), diag(52, 20));
}

TEST(Lp, SearchFindsVerifiedCertificate) {
  const auto res = lyapunov::search_certificate_lp(2, 0.1, 0.05, 30, kField2);
  EXPECT_GE(res.margin, 0.0);
  EXPECT_TRUE(res.refined.passed());
  EXPECT_TRUE(lyapunov::verify_certificate(res.certificate, 0.1, 200, kField2, 200).passed());
  EXPECT_LE(res.certificate.H.cwiseAbs().maxCoeff(), 100.0 + 1e-9);
}

TEST(Lp, SearchWithRounding) {
  lyapunov::SearchOptions opts;
  opts.round_to_integer = true;
  const auto res = lyapunov::search_certificate_lp(2, 0.1, 0.05, 30, kField2, opts);
  EXPECT_EQ(res.certificate.H, res.certificate.H.array().round().matrix());
}

TEST(Lp, HugeRateIsInfeasible) {
  EXPECT_THROW(lyapunov::search_certificate_lp(2, 0.1, 10.0, 30, kField2), NoCertificateError);
}

TEST(Lp, UnboundedWithoutEntryBound) {
  // Without a bound on H the margin scales with H.
  lyapunov::SearchOptions opts;
  opts.entry_bound = INFINITY;
  EXPECT_THROW(lyapunov::search_certificate_lp(2, 0.1, 0.05, 10, kField2, opts), GridTooCoarseError);
}

TEST(Lp, OnePieceCertificate) {
  const auto res = lyapunov::search_certificate_lp(1, 0.1, 0.05, 50, parametric::GameField<>(1));
  EXPECT_GT(res.certificate.H(0, 0), 0.0);
}
