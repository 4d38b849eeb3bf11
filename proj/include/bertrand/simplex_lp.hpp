#ifndef BERTRAND_SIMPLEX_LP_HPP
#define BERTRAND_SIMPLEX_LP_HPP

// Dense two-phase tableau simplex for small linear programs
//   maximize c^T z  subject to  A z <= b,  z >= 0.
// Bland's rule throughout, so degenerate problems cannot cycle.

#include <cmath>
#include <limits>
#include <vector>

#include "bertrand/common.hpp"

namespace bertrand::lp {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vector z;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int pivots = 0;
};

class DenseSimplex {
 public:
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit DenseSimplex(double tol = 1e-9) : tol_(tol) {}

  LpResult solve(const Matrix& A, const Vector& b, const Vector& c) {
    const int rows = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (b.size() != rows || c.size() != n) throw UsageError("LP dimensions are inconsistent");

    // Columns: [z (n) | slacks (rows) | artificials (k) | rhs].
    std::vector<int> needs_artificial;
    for (int i = 0; i < rows; ++i) {
      if (b[i] < 0.0) needs_artificial.push_back(i);
    }
    const int k = static_cast<int>(needs_artificial.size());
    n_ = n;
    slack0_ = n;
    art0_ = n + rows;
    cols_ = n + rows + k;
    T_ = Tableau::Zero(rows + 1, cols_ + 1);
    basis_.assign(rows, -1);
    for (int i = 0; i < rows; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      T_.row(i).head(n) = sign * A.row(i);
      T_(i, slack0_ + i) = sign;
      T_(i, cols_) = sign * b[i];
      basis_[i] = slack0_ + i;
    }
    for (int a = 0; a < k; ++a) {
      const int i = needs_artificial[a];
      T_(i, art0_ + a) = 1.0;
      basis_[i] = art0_ + a;
    }

    LpResult result;
    if (k > 0) {
      // Phase 1: maximize -sum(artificials). Objective row holds reduced costs
      // in the convention "row = -objective coefficients"; rhs = -objective.
      T_.row(rows).setZero();
      for (int a = 0; a < k; ++a) T_(rows, art0_ + a) = 1.0;
      for (int i : needs_artificial) T_.row(rows) -= T_.row(i);
      if (!iterate(cols_, result.pivots)) {
        throw Error("phase-1 simplex reported unboundedness");
      }
      if (-T_(rows, cols_) > tol_ * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        result.status = LpStatus::infeasible;
        return result;
      }
      drive_out_artificials(result.pivots);
    }

    // Phase 2 over non-artificial columns.
    T_.row(rows).setZero();
    T_.row(rows).head(n) = -c.transpose();
    for (int i = 0; i < rows; ++i) {
      const int j = basis_[i];
      if (j < n && c[j] != 0.0) T_.row(rows) += c[j] * T_.row(i);
    }
    if (!iterate(art0_, result.pivots)) {
      result.status = LpStatus::unbounded;
      return result;
    }
    result.status = LpStatus::optimal;
    result.z = Vector::Zero(n);
    for (int i = 0; i < rows; ++i) {
      if (basis_[i] < n) result.z[basis_[i]] = T_(i, cols_);
    }
    result.objective = c.dot(result.z);
    return result;
  }

 private:
  // Pivots until optimal (true) or unbounded (false). Entering columns are
  // restricted to indices < limit.
  bool iterate(int limit, int& pivots) {
    const int rows = static_cast<int>(T_.rows()) - 1;
    for (;;) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (T_(rows, j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows; ++i) {
        const double a = T_(i, enter);
        if (a > tol_) {
          const double ratio = T_(i, cols_) / a;
          if (ratio < best - tol_ || (std::abs(ratio - best) <= tol_ && leave >= 0 && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void pivot(int r, int col) {
    T_.row(r) /= T_(r, col);
    for (int i = 0; i < T_.rows(); ++i) {
      if (i != r) {
        const double f = T_(i, col);
        if (f != 0.0) T_.row(i) -= f * T_.row(r);
      }
    }
    basis_[r] = col;
  }

  void drive_out_artificials(int& pivots) {
    const int rows = static_cast<int>(T_.rows()) - 1;
    for (int i = 0; i < rows; ++i) {
      if (basis_[i] < art0_) continue;
      for (int j = 0; j < art0_; ++j) {
        if (std::abs(T_(i, j)) > tol_) {
          pivot(i, j);
          ++pivots;
          break;
        }
      }
      // Otherwise the row is redundant; the artificial stays basic at zero.
    }
  }

  double tol_;
  Tableau T_;
  std::vector<int> basis_;
  int n_ = 0, slack0_ = 0, art0_ = 0, cols_ = 0;
};

inline LpResult solve_lp(const Matrix& A, const Vector& b, const Vector& c, double tol = 1e-9) {
  return DenseSimplex(tol).solve(A, b, c);
}

}  // namespace bertrand::lp

#endif  // BERTRAND_SIMPLEX_LP_HPP
