#ifndef BERTRAND_LYAPUNOV_HPP
#define BERTRAND_LYAPUNOV_HPP

// Verification and construction of quadratic Lyapunov certificates for the
// projected dynamics on the slope polytope.
//
// A certificate (H, x*, w) is accepted when
//   (i)   alpha_lower |e|^2 <= L(x) <= alpha_upper |e|^2,       e = x - x*,
//   (ii)  <grad L(x), v(x)> <= -w |e|^2 on the polytope,
//   (iii) <grad L(x), grad g_i(x)> <= 0 wherever g_i(x) = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bertrand/certificate.hpp"
#include "bertrand/common.hpp"
#include "bertrand/geometry.hpp"
#include "bertrand/parametric.hpp"
#include "bertrand/simplex_lp.hpp"

namespace bertrand::lyapunov {

/// Quadratic multipliers sigma_i(x) = 1/2 e^T Sigma_i e for the identity
///   x1 x2 <grad L, v> = g_0 sigma_0 + g_1 sigma_1 + g_2 sigma_2   (m = 2).
struct DecompositionData {
  std::array<Matrix, 3> sigma;
  double lambda_star = 0.0;  // largest eigenvalue over all Sigma_i
};

inline double largest_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

inline DecompositionData make_decomposition(std::array<Matrix, 3> sigma) {
  DecompositionData d{std::move(sigma), -std::numeric_limits<double>::infinity()};
  for (const auto& S : d.sigma) d.lambda_star = std::max(d.lambda_star, largest_eigenvalue(S));
  return d;
}

/// The published multipliers for H = diag(52, 20).
inline DecompositionData reference_decomposition() {
  Matrix s0(2, 2), s1(2, 2), s2(2, 2);
  s0 << -21.0 / 38.0, 0.0, 0.0, -0.5;
  s1 << -15463.0 / 1026.0, -955.0 / 108.0, -955.0 / 108.0, -11.0 / 2.0;
  s2 << -21.0 / 38.0, -35.0 / 108.0, -35.0 / 108.0, -143.0 / 54.0;
  return make_decomposition({s0, s1, s2});
}

/// w = -lambda* / 8 * (2 - 2 delta).
inline double implied_rate(double lambda_star, double delta) { return -lambda_star / 8.0 * (2.0 - 2.0 * delta); }

/// L(x) = 1/2 (x - x*)^T diag(52, 20) (x - x*) around x* = (1/2, 1/2), with
/// the decrease rate implied by the published multipliers.
inline QuadraticCertificate reference_certificate(double delta) {
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = 52.0;
  H(1, 1) = 20.0;
  return QuadraticCertificate::make(H, parametric::equilibrium_params(2),
                                    implied_rate(reference_decomposition().lambda_star, delta));
}

/// Expansion of x1 x2 <grad L, v> for H = diag(52, 20) as a cubic in x.
inline double reference_cubic(double x1, double x2) {
  return -5.0 * x2 * x2 * x2 / 2.0 - 119.0 * x2 * x2 * x1 / 12.0 + 53.0 * x2 * x2 / 8.0 -
         91.0 * x2 * x1 * x1 / 12.0 + 107.0 * x2 * x1 / 8.0 - 55.0 * x2 / 12.0 - 5.0 * x1 / 12.0;
}

/// x1 x2 <H (x - x*), v(x)> with the closed-form m = 2 field.
inline double scaled_rate(const QuadraticCertificate& cert, const Vector& x) {
  return x[0] * x[1] * cert.gradient(x).dot(parametric::closed_form_m2(x[0], x[1]));
}

/// g_0 sigma_0 + g_1 sigma_1 + g_2 sigma_2 at x.
inline double decomposition_value(const DecompositionData& d, const Vector& x, const Vector& x_star, double delta) {
  const Vector g = geometry::constraint_values(x, delta);
  const Vector e = x - x_star;
  double total = 0.0;
  for (int i = 0; i < 3; ++i) total += g[i] * 0.5 * e.dot(d.sigma[i] * e);
  return total;
}

// ---------------------------------------------------------------------------
// Sampling of the polytope.

struct SamplePoints {
  std::vector<Vector> interior;
  // Facet samples, tagged with the index of the constraint that is active.
  std::vector<std::pair<int, Vector>> facet;
};

/// Lattice with `resolution` points per axis over the bounding box of B,
/// filtered to B, plus `facet_points` points on each facet (m = 2) or the
/// lattice pushed onto each facet (m > 2).
inline SamplePoints sample_polytope(int m, double delta, int resolution, int facet_points) {
  if (resolution < 2) throw UsageError("grid resolution must be >= 2");
  SamplePoints pts;
  const double hi = m - (m - 1) * delta;
  auto coord = [&](int k, int res) { return delta + (hi - delta) * k / (res - 1); };
  std::vector<int> idx(m, 0);
  for (;;) {
    Vector x(m);
    for (int i = 0; i < m; ++i) x[i] = coord(idx[i], resolution);
    if (x.sum() <= m + 1e-12) pts.interior.push_back(x);
    int i = 0;
    while (i < m && ++idx[i] == resolution) idx[i++] = 0;
    if (i == m) break;
  }
  if (m == 2) {
    for (int k = 0; k < facet_points; ++k) {
      const double t = delta + (hi - delta) * k / std::max(1, facet_points - 1);
      Vector on0(2), on1(2), on2(2);
      on0 << t, 2.0 - t;
      on1 << delta, t;
      on2 << t, delta;
      pts.facet.emplace_back(0, on0);
      pts.facet.emplace_back(1, on1);
      pts.facet.emplace_back(2, on2);
    }
  } else {
    for (const auto& x : pts.interior) {
      for (int i = 1; i <= m; ++i) {
        Vector y = x;
        y[i - 1] = delta;
        pts.facet.emplace_back(i, y);
      }
      const Vector excess = x.array() - delta;
      if (excess.sum() > 0.0) {
        pts.facet.emplace_back(0, (delta + excess.array() * (m * (1.0 - delta) / excess.sum())).matrix());
      }
    }
  }
  return pts;
}

/// Gradient of g_i: -1 vector for i = 0, e_i otherwise.
inline Vector constraint_gradient(int m, int i) {
  if (i == 0) return Vector::Constant(m, -1.0);
  Vector g = Vector::Zero(m);
  g[i - 1] = 1.0;
  return g;
}

// ---------------------------------------------------------------------------
// Verification.

struct ConditionResult {
  double margin = std::numeric_limits<double>::infinity();  // worst value, >= 0 passes
  std::optional<Vector> witness;                            // point attaining the worst margin
  bool passed(double tol = 0.0) const { return margin >= -tol; }
};

struct VerificationReport {
  ConditionResult bounds;     // (i)
  ConditionResult decrease;   // (ii)
  ConditionResult boundary;   // (iii), sampled
  std::optional<double> boundary_analytic;  // (iii) at facet endpoints, m = 2
  std::size_t interior_points = 0;
  std::size_t facet_points = 0;
  std::vector<std::string> warnings;

  bool passed() const {
    return bounds.passed(1e-12) && decrease.passed() && boundary.passed(1e-12) &&
           (!boundary_analytic || *boundary_analytic >= -1e-12);
  }
};

namespace detail {

inline void update(ConditionResult& r, double margin, const Vector& x) {
  if (margin < r.margin) {
    r.margin = margin;
    r.witness = x;
  }
}

}  // namespace detail

/// Checks conditions (i)-(iii) on a lattice with `resolution` points per axis
/// plus `facet_points` points per facet. For m = 2, condition (iii) is also
/// checked exactly: <grad L, grad g_i> is affine along each facet, so its
/// maximum sits at a facet endpoint.
template <typename Field>
VerificationReport verify_certificate(const QuadraticCertificate& cert, double delta, int resolution,
                                      const Field& field, int facet_points = -1) {
  const int m = cert.m();
  if (field.m() != m) throw UsageError("certificate and field dimensions differ");
  VerificationReport rep;
  if (delta > 0.5) rep.warnings.push_back("delta > 1/2 is outside the stability result's hypothesis");
  if (facet_points < 0) facet_points = resolution;
  const auto pts = sample_polytope(m, delta, resolution, facet_points);
  rep.interior_points = pts.interior.size();
  rep.facet_points = pts.facet.size();

  auto check_point = [&](const Vector& x) {
    const Vector e = x - cert.x_star;
    const double r2 = e.squaredNorm();
    const auto [value, grad] = lyapunov_value_grad(cert, x);
    const double scale = 1e-12 * (1.0 + cert.alpha_upper * r2);
    detail::update(rep.bounds, std::min(value - cert.alpha_lower * r2, cert.alpha_upper * r2 - value) + scale, x);
    detail::update(rep.decrease, -grad.dot(field(x)) - cert.w * r2, x);
    return grad;
  };
  if (!(cert.alpha_lower > 0.0)) rep.bounds.margin = -1.0;
  for (const auto& x : pts.interior) check_point(x);
  for (const auto& [i, x] : pts.facet) {
    const Vector grad = check_point(x);
    detail::update(rep.boundary, -grad.dot(constraint_gradient(m, i)), x);
  }
  if (m == 2) {
    const double hi = 2.0 - delta;
    const std::array<std::pair<int, std::array<double, 2>>, 6> ends{{{0, {delta, hi}},
                                                                     {0, {hi, delta}},
                                                                     {1, {delta, delta}},
                                                                     {1, {delta, hi}},
                                                                     {2, {delta, delta}},
                                                                     {2, {hi, delta}}}};
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [i, p] : ends) {
      Vector x(2);
      x << p[0], p[1];
      worst = std::min(worst, -cert.gradient(x).dot(constraint_gradient(2, i)));
    }
    rep.boundary_analytic = worst;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Polynomial decomposition (m = 2).

struct DecompositionReport {
  // max |x1 x2 <grad L, v> - cubic| over the samples
  double expansion_residual = 0.0;
  // max |cubic - sum g_i sigma_i| over the samples
  double decomposition_residual = 0.0;
  std::size_t samples = 0;
};

/// Compares the scaled decrease rate, its cubic expansion and the g-sigma
/// decomposition on a `resolution`-lattice of B.
inline DecompositionReport decomposition_check(const DecompositionData& decomp, double delta, int resolution = 100) {
  const auto cert = reference_certificate(delta);
  const auto pts = sample_polytope(2, delta, resolution, 0);
  DecompositionReport rep;
  for (const auto& x : pts.interior) {
    const double cubic = reference_cubic(x[0], x[1]);
    rep.expansion_residual = std::max(rep.expansion_residual, std::abs(scaled_rate(cert, x) - cubic));
    rep.decomposition_residual =
        std::max(rep.decomposition_residual, std::abs(cubic - decomposition_value(decomp, x, cert.x_star, delta)));
  }
  rep.samples = pts.interior.size();
  return rep;
}

namespace detail {

inline double max_eig_2x2(double a, double b, double c) {
  return 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

// Golden-section minimization of a convex function of one variable on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, double& arg, int iters = 90) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  arg = f1 <= f2 ? x1 : x2;
  return std::min(f1, f2);
}

// Nested golden-section search over the box [-bound, bound]^dim. Exact for
// convex objectives up to the line-search tolerance.
template <typename F>
double nested_min(F&& f, Vector& t, int dim, double bound) {
  if (dim == 0) return f(t);
  double arg = 0.0;
  auto inner = [&](double s) {
    t[dim - 1] = s;
    return nested_min(f, t, dim - 1, bound);
  };
  const double best = golden_min(inner, -bound, bound, arg, dim == 1 ? 90 : 70);
  t[dim - 1] = arg;
  nested_min(f, t, dim - 1, bound);
  return best;
}

// Coefficients of the monomials e1^a e2^b, a + b <= 3, in the order
// (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) (2,1) (1,2) (0,3).
inline constexpr std::array<std::array<int, 2>, 10> kMonomials{
    {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};

inline int monomial_index(int a, int b) {
  for (int k = 0; k < 10; ++k) {
    if (kMonomials[k][0] == a && kMonomials[k][1] == b) return k;
  }
  return -1;
}

}  // namespace detail

/// Re-derives multipliers Sigma_0..Sigma_2 for the certificate H (default
/// diag(52, 20)) by matching the coefficients of the cubic x1 x2 <grad L, v>
/// against sum g_i sigma_i. The system is underdetermined; among its
/// solutions the one with the smallest largest eigenvalue is returned.
inline DecompositionData rederive_sigmas(double delta, std::optional<Matrix> H_opt = std::nullopt) {
  Matrix H = H_opt.value_or(reference_certificate(delta).H);
  if (H.rows() != 2 || H.cols() != 2) throw UsageError("multiplier re-derivation requires m = 2");
  const Vector x_star = parametric::equilibrium_params(2);
  const auto cert = QuadraticCertificate::make(H, x_star, 1.0);

  // Target coefficients in e = x - x*: least-squares fit of the (exactly
  // cubic) scaled rate on a 6x6 lattice.
  Matrix V(36, 10);
  Vector rhs(36);
  int row = 0;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double e1 = -0.35 + 0.14 * i, e2 = -0.35 + 0.14 * j;
      for (int k = 0; k < 10; ++k) {
        V(row, k) = std::pow(e1, detail::kMonomials[k][0]) * std::pow(e2, detail::kMonomials[k][1]);
      }
      Vector x(2);
      x << 0.5 + e1, 0.5 + e2;
      rhs[row++] = scaled_rate(cert, x);
    }
  }
  const Vector target = V.colPivHouseholderQr().solve(rhs);

  // Linear map from the 9 multiplier entries (a_i, b_i, c_i), Sigma_i =
  // [[a_i, b_i], [b_i, c_i]], to monomial coefficients of sum g_i sigma_i.
  // In e-coordinates g_0 = 1 - e1 - e2, g_1 = e1 + 1/2 - delta, g_2 = e2 + 1/2 - delta.
  const std::array<std::array<double, 3>, 3> g{{{1.0, -1.0, -1.0}, {0.5 - delta, 1.0, 0.0}, {0.5 - delta, 0.0, 1.0}}};
  Matrix M = Matrix::Zero(10, 9);
  for (int i = 0; i < 3; ++i) {
    // sigma_i = 1/2 a e1^2 + b e1 e2 + 1/2 c e2^2
    const std::array<std::pair<std::array<int, 2>, double>, 3> quad{
        {{{2, 0}, 0.5}, {{1, 1}, 1.0}, {{0, 2}, 0.5}}};
    for (int q = 0; q < 3; ++q) {
      const auto [pw, coef] = quad[q];
      // constant part of g_i
      M(detail::monomial_index(pw[0], pw[1]), 3 * i + q) += g[i][0] * coef;
      M(detail::monomial_index(pw[0] + 1, pw[1]), 3 * i + q) += g[i][1] * coef;
      M(detail::monomial_index(pw[0], pw[1] + 1), 3 * i + q) += g[i][2] * coef;
    }
  }
  if (target.head(3).cwiseAbs().maxCoeff() > 1e-9) {
    throw SearchFailureError("scaled decrease rate has constant or linear terms; no quadratic multipliers exist");
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
  const Vector particular = cod.solve(target);
  if ((M * particular - target).cwiseAbs().maxCoeff() > 1e-9) {
    throw SearchFailureError("coefficient-matching system has no solution");
  }
  Eigen::FullPivLU<Matrix> lu(M);
  const Matrix null = lu.kernel();
  const int dim = (lu.rank() == 9) ? 0 : static_cast<int>(null.cols());

  auto entries_at = [&](const Vector& t) -> Vector { return dim == 0 ? particular : Vector(particular + null * t); };
  auto worst_eig = [&](const Vector& t) {
    const Vector s = entries_at(t);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) worst = std::max(worst, detail::max_eig_2x2(s[3 * i], s[3 * i + 1], s[3 * i + 2]));
    return worst;
  };

  Vector t = Vector::Zero(dim);
  if (dim > 0) {
    double bound = 10.0 * (1.0 + particular.norm()) / std::max(1e-12, null.colwise().norm().minCoeff());
    for (int attempt = 0; attempt < 6; ++attempt) {
      detail::nested_min(worst_eig, t, dim, bound);
      if (t.cwiseAbs().maxCoeff() < 0.9 * bound) break;
      bound *= 4.0;
    }
  }
  const Vector s = entries_at(t);
  std::array<Matrix, 3> sigma;
  for (int i = 0; i < 3; ++i) {
    sigma[i] = Matrix(2, 2);
    sigma[i] << s[3 * i], s[3 * i + 1], s[3 * i + 1], s[3 * i + 2];
  }
  auto decomp = make_decomposition(std::move(sigma));

  double residual = 0.0;
  for (const auto& x : sample_polytope(2, delta, 10, 0).interior) {
    residual = std::max(residual, std::abs(scaled_rate(cert, x) - decomposition_value(decomp, x, x_star, delta)));
  }
  if (residual > 1e-10) {
    throw SearchFailureError("re-derived multipliers leave residual " + std::to_string(residual));
  }
  if (decomp.lambda_star > 1e-12) {
    std::ostringstream msg;
    msg << "no negative semidefinite multipliers found; best largest eigenvalue " << decomp.lambda_star;
    throw SearchFailureError(msg.str());
  }
  return decomp;
}

// ---------------------------------------------------------------------------
// Certificate search by linear programming.

/// The sampled certificate conditions as linear constraints in the upper
/// triangle of H and a margin gamma:
///   <H e, v(x)> + gamma |e|^2 <= -w |e|^2   on sample points,
///   <H e, grad g_i(x)>        <= 0          on facet samples,
///   |H_kl| <= entry_bound.
/// The margin is scaled by |e|^2 so the optimum rate is comparable across points.
struct CertificateLp {
  int m = 0;
  double w = 0.0;
  double entry_bound = 100.0;
  // Rows over (H upper-triangle entries..., gamma).
  Matrix A;
  Vector b;
  std::size_t decrease_rows = 0;
  std::size_t boundary_rows = 0;

  int entry_count() const { return m * (m + 1) / 2; }

  /// Upper-triangle entries of H, row by row.
  Vector pack(const Matrix& H) const {
    Vector h(entry_count());
    int k = 0;
    for (int r = 0; r < m; ++r) {
      for (int c = r; c < m; ++c) h[k++] = H(r, c);
    }
    return h;
  }

  Matrix unpack(const Vector& h) const {
    Matrix H(m, m);
    int k = 0;
    for (int r = 0; r < m; ++r) {
      for (int c = r; c < m; ++c) {
        H(r, c) = h[k];
        H(c, r) = h[k];
        ++k;
      }
    }
    return H;
  }

  /// Largest constraint violation of (H, gamma); <= 0 means feasible.
  double max_violation(const Matrix& H, double gamma = 0.0) const {
    Vector z(entry_count() + 1);
    z.head(entry_count()) = pack(H);
    z[entry_count()] = gamma;
    return (A * z - b).maxCoeff();
  }
};

template <typename Field>
CertificateLp build_certificate_lp(int m, double delta, double w, int resolution, const Field& field,
                                   double entry_bound = 100.0) {
  const auto pts = sample_polytope(m, delta, resolution, resolution);
  const Vector x_star = parametric::equilibrium_params(m);
  CertificateLp lp;
  lp.m = m;
  lp.w = w;
  lp.entry_bound = entry_bound;
  const int p = lp.entry_count();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  // Coefficient of H_rc (r <= c) in <H e, u>.
  auto bilinear = [&](const Vector& e, const Vector& u) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(p + 1);
    int k = 0;
    for (int r = 0; r < m; ++r) {
      for (int c = r; c < m; ++c) row[k++] = (r == c) ? e[r] * u[r] : e[c] * u[r] + e[r] * u[c];
    }
    return row;
  };
  auto add_decrease = [&](const Vector& x) {
    const Vector e = x - x_star;
    const double r2 = e.squaredNorm();
    if (r2 < 1e-14) return;
    Eigen::RowVectorXd row = bilinear(e, field(x));
    row[p] = r2;
    rows.push_back(row);
    rhs.push_back(-w * r2);
    ++lp.decrease_rows;
  };
  for (const auto& x : pts.interior) add_decrease(x);
  for (const auto& [i, x] : pts.facet) {
    add_decrease(x);
    rows.push_back(bilinear(x - x_star, constraint_gradient(m, i)));
    rhs.push_back(0.0);
    ++lp.boundary_rows;
  }
  lp.A.resize(static_cast<Eigen::Index>(rows.size()), p + 1);
  lp.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lp.A.row(static_cast<Eigen::Index>(r)) = rows[r];
    lp.b[static_cast<Eigen::Index>(r)] = rhs[r];
  }
  return lp;
}

struct CertificateSearchResult {
  QuadraticCertificate certificate;
  double margin = 0.0;  // optimal gamma; after integer rounding, the smallest slack over the sampled rows
  int pivots = 0;
  VerificationReport refined;
};

struct SearchOptions {
  double entry_bound = 100.0;  // infinity leaves H unbounded
  int refine_factor = 4;
  bool round_to_integer = false;
};

/// Maximizes the margin gamma >= 0 subject to the sampled conditions, then
/// re-verifies the resulting certificate on a refine_factor-times finer grid.
template <typename Field>
CertificateSearchResult search_certificate_lp(int m, double delta, double w, int resolution, const Field& field,
                                              const SearchOptions& opts = {}) {
  const auto lp = build_certificate_lp(m, delta, w, resolution, field, opts.entry_bound);
  const int p = lp.entry_count();
  const bool bounded = std::isfinite(opts.entry_bound);
  // Nonnegative variables: bounded entries are shifted, H = z - bound;
  // unbounded ones are split, H = z+ - z-.
  const int hvars = bounded ? p : 2 * p;
  const Eigen::Index rows = lp.A.rows() + (bounded ? p : 0);
  Matrix A = Matrix::Zero(rows, hvars + 1);
  Vector b(rows);
  for (Eigen::Index r = 0; r < lp.A.rows(); ++r) {
    const auto coef = lp.A.row(r).head(p);
    A.row(r).head(p) = coef;
    if (bounded) {
      b[r] = lp.b[r] + opts.entry_bound * coef.sum();
    } else {
      A.row(r).segment(p, p) = -coef;
      b[r] = lp.b[r];
    }
    A(r, hvars) = lp.A(r, p);
  }
  if (bounded) {
    for (int k = 0; k < p; ++k) {
      A(lp.A.rows() + k, k) = 1.0;
      b[lp.A.rows() + k] = 2.0 * opts.entry_bound;
    }
  }
  Vector c = Vector::Zero(hvars + 1);
  c[hvars] = 1.0;
  const auto sol = lp::solve_lp(A, b, c);
  if (sol.status == lp::LpStatus::infeasible) {
    throw NoCertificateError("certificate LP is infeasible for w = " + std::to_string(w));
  }
  if (sol.status == lp::LpStatus::unbounded) {
    throw GridTooCoarseError("certificate LP margin is unbounded; refine the grid or bound H");
  }
  Vector h = bounded ? Vector(sol.z.head(p).array() - opts.entry_bound) : Vector(sol.z.head(p) - sol.z.segment(p, p));
  const Vector x_star = parametric::equilibrium_params(m);
  const int fine = resolution * opts.refine_factor;
  if (!opts.round_to_integer) {
    std::optional<QuadraticCertificate> cert;
    try {
      cert = QuadraticCertificate::make(lp.unpack(h), x_star, w);
    } catch (const DomainError& e) {
      throw NoCertificateError(std::string("LP solution is not a valid certificate: ") + e.what());
    }
    auto refined = verify_certificate(*cert, delta, fine, field);
    if (!refined.passed()) throw NoCertificateError("LP certificate failed verification on the refined grid");
    return {*cert, sol.z[hvars], sol.pivots, std::move(refined)};
  }

  // Integer rounding: try every floor/ceil combination of the entries, most
  // slack on the sampled rows first, and keep the first that verifies.
  if (p > 16) throw UsageError("integer rounding supports at most 16 free entries (m <= 5)");
  std::vector<std::pair<double, Vector>> candidates;
  for (long mask = 0; mask < (1L << p); ++mask) {
    Vector r(p);
    for (int k = 0; k < p; ++k) r[k] = (mask >> k) & 1 ? std::ceil(h[k]) : std::floor(h[k]);
    const double viol = lp.max_violation(lp.unpack(r), 0.0);
    if (viol <= 0.0) candidates.emplace_back(viol, std::move(r));
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [viol, r] : candidates) {
    try {
      const auto cert = QuadraticCertificate::make(lp.unpack(r), x_star, w);
      auto refined = verify_certificate(cert, delta, fine, field);
      if (refined.passed()) return {cert, -viol, sol.pivots, std::move(refined)};
    } catch (const DomainError&) {
    }
  }
  throw NoCertificateError("no integer rounding of the LP solution verifies on the refined grid");
}

}  // namespace bertrand::lyapunov

#endif  // BERTRAND_LYAPUNOV_HPP
