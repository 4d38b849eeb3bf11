#ifndef BERTRAND_DYNAMICS_HPP
#define BERTRAND_DYNAMICS_HPP

// Projected mean dynamics xdot = Pi_{T(x)}(v(x)) on the slope polytope,
// integrated with projected Euler.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bertrand/certificate.hpp"
#include "bertrand/common.hpp"
#include "bertrand/geometry.hpp"
#include "bertrand/parametric.hpp"

namespace bertrand::dynamics {

/// Time-indexed feasible states. Lyapunov values are filled only when a
/// certificate was supplied; active sets are computed on demand.
struct Trajectory {
  int m = 0;
  double delta = 0.1;
  Vector x_star;
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> distance_to_eq;
  std::vector<double> lyapunov;
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  const Vector& final_state() const { return states.back(); }

  std::vector<int> active_set_at(std::size_t k, double tol = 1e-9) const {
    return geometry::active_set(states.at(k), delta, tol);
  }

  void record(double t, const Vector& x, const lyapunov::QuadraticCertificate* cert) {
    times.push_back(t);
    states.push_back(x);
    distance_to_eq.push_back((x - x_star).norm());
    if (cert != nullptr) lyapunov.push_back(cert->value(x));
  }
};

struct IntegrationOptions {
  // Record every `stride`-th step (the initial and final states always).
  int stride = 1;
  std::optional<lyapunov::QuadraticCertificate> certificate;
};

/// Projected Euler: x_{t+h} = project_feasible(x_t + h v(x_t)).
template <typename Field>
Trajectory integrate_projected(const Vector& x0, double horizon, double step, const Field& field,
                               double delta, const IntegrationOptions& opts = {}) {
  if (!(step > 0.0)) throw DomainError("integration step must be positive");
  if (!(horizon >= 0.0)) throw DomainError("integration horizon must be nonnegative");
  if (opts.stride < 1) throw UsageError("record stride must be >= 1");
  parametric::FeasibleParams(x0, delta).require_feasible(1e-9);
  const auto* cert = opts.certificate ? &*opts.certificate : nullptr;

  Trajectory traj;
  traj.m = static_cast<int>(x0.size());
  traj.delta = delta;
  traj.x_star = parametric::equilibrium_params(traj.m);
  const long steps = std::lround(horizon / step);
  Vector x = x0;
  traj.record(0.0, x, cert);
  for (long k = 1; k <= steps; ++k) {
    const Vector v = field(x);
    if (!v.allFinite()) {
      traj.aborted = true;
      traj.abort_reason = "non-finite field at t=" + std::to_string((k - 1) * step);
      if (traj.times.back() != (k - 1) * step) traj.record((k - 1) * step, x, cert);
      return traj;
    }
    x = geometry::project_feasible(x + step * v, delta);
    if (k % opts.stride == 0 || k == steps) traj.record(k * step, x, cert);
  }
  return traj;
}

template <parametric::ProfitKernelLike K = parametric::AllOrNothing>
Trajectory integrate_projected(const Vector& x0, double horizon, double step, double delta,
                               const K& kernel = {}, const IntegrationOptions& opts = {}) {
  return integrate_projected(x0, horizon, step, parametric::GameField<K>(static_cast<int>(x0.size()), kernel),
                             delta, opts);
}

struct FieldSample {
  Vector x;
  bool feasible = false;
  // Raw field v(x) and its tangent-cone projection; empty when infeasible.
  std::optional<Vector> v;
  std::optional<Vector> projected_v;
};

struct Rectangle {
  double x1_min, x1_max, x2_min, x2_max;
};

/// Default plotting window: the bounding box of B for m = 2.
inline Rectangle polytope_box(double delta) { return {delta, 2.0 - delta, delta, 2.0 - delta}; }

/// resolution x resolution samples of the m = 2 field, row-major in x1.
template <typename Field>
std::vector<FieldSample> sample_vector_field(const Rectangle& box, int resolution, double delta,
                                             const Field& field) {
  if (field.m() != 2) throw UsageError("vector-field sampling requires m = 2");
  if (resolution < 2) throw UsageError("vector-field resolution must be >= 2");
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(resolution) * resolution);
  for (int i = 0; i < resolution; ++i) {
    const double x1 = box.x1_min + (box.x1_max - box.x1_min) * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double x2 = box.x2_min + (box.x2_max - box.x2_min) * j / (resolution - 1);
      FieldSample s;
      s.x = Vector(2);
      s.x << x1, x2;
      s.feasible = parametric::FeasibleParams(s.x, delta).feasible(1e-12);
      if (s.feasible) {
        s.v = field(s.x);
        s.projected_v = geometry::project_tangent(s.x, *s.v, delta);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

struct DecreaseReport {
  std::vector<double> values;
  // Largest L(x_{k+1}) - L(x_k) over the trajectory (negative if strictly decreasing).
  double max_increase = 0.0;
  // Steps where L rose by more than the slack.
  int increase_count = 0;
  // States where <grad L, v> > -w |x - x*|^2 beyond `bound_tol`.
  int bound_violations = 0;

  bool monotone() const { return increase_count == 0; }
};

template <typename Field>
DecreaseReport check_lyapunov_decrease(const Trajectory& traj, const lyapunov::QuadraticCertificate& cert,
                                       const Field& field, double slack = 1e-12, double bound_tol = 1e-12) {
  if (cert.m() != traj.m) throw UsageError("certificate and trajectory dimensions differ");
  DecreaseReport rep;
  rep.values.reserve(traj.size());
  rep.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vector& x = traj.states[k];
    const auto [value, grad] = lyapunov::lyapunov_value_grad(cert, x);
    rep.values.push_back(value);
    if (k > 0) {
      const double inc = value - rep.values[k - 1];
      rep.max_increase = std::max(rep.max_increase, inc);
      if (inc > slack) ++rep.increase_count;
    }
    const double rate = grad.dot(field(x));
    if (rate > -cert.w * (x - cert.x_star).squaredNorm() + bound_tol) ++rep.bound_violations;
  }
  if (traj.size() < 2) rep.max_increase = 0.0;
  return rep;
}

}  // namespace bertrand::dynamics

#endif  // BERTRAND_DYNAMICS_HPP
