#ifndef BERTRAND_CERTIFICATE_HPP
#define BERTRAND_CERTIFICATE_HPP

#include <cmath>
#include <utility>

#include "bertrand/common.hpp"

namespace bertrand::lyapunov {

/// Quadratic Lyapunov candidate L(x) = 1/2 (x - x*)^T H (x - x*) with the
/// decrease rate w and the quadratic comparison bounds
///   alpha_lower |x - x*|^2 <= L(x) <= alpha_upper |x - x*|^2.
struct QuadraticCertificate {
  Matrix H;
  Vector x_star;
  double w = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;

  /// Validates symmetry and positive definiteness; alphas are half the
  /// extreme eigenvalues of H.
  static QuadraticCertificate make(Matrix H, Vector x_star, double w) {
    if (H.rows() != H.cols() || H.rows() != x_star.size()) {
      throw UsageError("certificate matrix and center have inconsistent sizes");
    }
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + H.cwiseAbs().maxCoeff())) {
      throw DomainError("certificate matrix must be symmetric");
    }
    if (!(w > 0.0)) throw DomainError("certificate decrease rate w must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw DomainError("certificate matrix must be positive definite");
    return {std::move(H), std::move(x_star), w, 0.5 * lo, 0.5 * hi};
  }

  int m() const { return static_cast<int>(x_star.size()); }

  double value(const Vector& x) const {
    const Vector e = x - x_star;
    return 0.5 * e.dot(H * e);
  }

  Vector gradient(const Vector& x) const { return H * (x - x_star); }
};

/// (L(x), grad L(x)).
inline std::pair<double, Vector> lyapunov_value_grad(const QuadraticCertificate& cert, const Vector& x) {
  const Vector e = x - cert.x_star;
  Vector grad = cert.H * e;
  return {0.5 * e.dot(grad), std::move(grad)};
}

}  // namespace bertrand::lyapunov

#endif  // BERTRAND_CERTIFICATE_HPP
