#ifndef BERTRAND_RRM_HPP
#define BERTRAND_RRM_HPP

// Regularized Robbins-Monro learning with the Euclidean mirror map
//   y_{n+1} = y_n + gamma_n vhat_n,   x_{n+1} = Q(y_{n+1}),
// where Q is the projection onto the slope polytope and vhat_n is a noisy,
// biased sample of the game gradient. Includes the greedy form
// x_{n+1} = Q(x_n + gamma_n vhat_n) and optimistic / extra-gradient variants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bertrand/certificate.hpp"
#include "bertrand/common.hpp"
#include "bertrand/dynamics.hpp"
#include "bertrand/geometry.hpp"
#include "bertrand/parametric.hpp"

namespace bertrand::rrm {

enum class Variant { vanilla, optimistic, extra_gradient };
enum class ProjectionStyle { dual_accumulation, greedy };
// unit: b uniform on the unit sphere; ball: uniform in the unit ball; none: b = 0.
enum class BiasMode { unit, ball, none };

struct RRMConfig {
  int m = 2;
  double delta = 0.1;
  double l_gamma = 0.05;
  double l_sigma = -1.0;
  double l_b = 1.0;
  Variant variant = Variant::vanilla;
  ProjectionStyle projection_style = ProjectionStyle::greedy;
  long horizon = 100000;
  std::uint64_t seed = 0;
  bool noise_on = true;
  BiasMode bias_mode = BiasMode::unit;
  // Fixed bias direction; overrides bias_mode when set.
  std::optional<Vector> bias_direction;
  // Starting point; (1, ..., 1) when unset.
  std::optional<Vector> x0;
  // Replaces gamma_n = n^{-l_gamma} by a constant when set.
  std::optional<double> constant_step;
  // Regularizer shift c: the run starts from y_0 + c and uses Q(y - c).
  std::optional<Vector> dual_shift;
  // Run even when validate_schedule reports violations.
  bool override_schedule = false;
  int record_stride = 1;
  std::optional<lyapunov::QuadraticCertificate> certificate;
};

/// Reference experiment settings: delta = 1/10,
/// l_gamma = 0.05, l_sigma = -1, l_b = 1, greedy projection.
inline RRMConfig experiment_preset(int m, std::uint64_t seed = 0) {
  RRMConfig cfg;
  cfg.m = m;
  cfg.seed = seed;
  return cfg;
}

/// All schedule violations, empty when the run may proceed.
inline std::vector<std::string> validate_schedule(const RRMConfig& cfg) {
  std::vector<std::string> out;
  if (!(cfg.l_gamma > 0.0)) out.push_back("l_gamma must be > 0");
  if (cfg.l_gamma > 1.0) out.push_back("l_gamma must be <= 1");
  if (!(cfg.l_b > 0.0)) out.push_back("l_b must be > 0 (vanishing bias)");
  if (!(cfg.l_gamma - cfg.l_sigma > 0.5)) {
    out.push_back("l_gamma - l_sigma = " + std::to_string(cfg.l_gamma - cfg.l_sigma) + " must exceed 1/2");
  }
  return out;
}

struct SignalSample {
  Vector value;  // field + noise + bias
  Vector field;
  Vector noise;
  Vector bias;
};

/// Uniform draw from the unit ball in R^m: Gaussian direction, radius u^{1/m}.
inline Vector uniform_in_ball(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Vector g(m);
  for (int i = 0; i < m; ++i) g[i] = normal(rng);
  return g.normalized() * std::pow(unif(rng), 1.0 / m);
}

inline Vector uniform_on_sphere(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector g(m);
  for (int i = 0; i < m; ++i) g[i] = normal(rng);
  return g.normalized();
}

/// The fixed bias vector b of a run, drawn from the run's generator.
inline Vector draw_bias(const RRMConfig& cfg, std::mt19937_64& rng) {
  if (cfg.bias_direction) {
    if (cfg.bias_direction->size() != cfg.m) throw UsageError("bias_direction has the wrong dimension");
    return *cfg.bias_direction;
  }
  switch (cfg.bias_mode) {
    case BiasMode::unit:
      return uniform_on_sphere(cfg.m, rng);
    case BiasMode::ball:
      return uniform_in_ball(cfg.m, rng);
    case BiasMode::none:
      break;
  }
  return Vector::Zero(cfg.m);
}

/// vhat_n = v(x) + n^{l_sigma} theta_n + n^{-l_b} b.
template <typename Field>
SignalSample sample_signal(const Vector& x, long n, const RRMConfig& cfg, std::mt19937_64& rng, const Vector& b,
                           const Field& field) {
  if (n < 1) throw UsageError("signal index starts at n = 1");
  const double nd = static_cast<double>(n);
  SignalSample s;
  s.field = field(x);
  s.noise = cfg.noise_on ? Vector(std::pow(nd, cfg.l_sigma) * uniform_in_ball(cfg.m, rng)) : Vector::Zero(cfg.m);
  s.bias = std::pow(nd, -cfg.l_b) * b;
  s.value = s.field + s.noise + s.bias;
  return s;
}

inline SignalSample sample_signal(const Vector& x, long n, const RRMConfig& cfg, std::mt19937_64& rng,
                                  const Vector& b) {
  return sample_signal(x, n, cfg, rng, b, parametric::GameField<>(cfg.m));
}

namespace detail {

// Dual state kept as an unevaluated double-double sum per coordinate, so that
// adding and later removing a regularizer shift cancels exactly.
struct DualState {
  Vector hi, lo;

  explicit DualState(const Vector& y) : hi(y), lo(Vector::Zero(y.size())) {}

  void add(const Vector& d) {
    for (Eigen::Index i = 0; i < hi.size(); ++i) {
      const double s = hi[i] + d[i];
      const double bb = s - hi[i];
      const double err = (hi[i] - (s - bb)) + (d[i] - bb);
      const double t = err + lo[i];
      hi[i] = s + t;
      lo[i] = t - (hi[i] - s);
    }
  }

  // Rounded value of (hi + lo) - c.
  Vector minus(const Vector& c) const {
    Vector out(hi.size());
    for (Eigen::Index i = 0; i < hi.size(); ++i) {
      const double s = hi[i] - c[i];
      const double bb = s - hi[i];
      const double err = (hi[i] - (s - bb)) + (-c[i] - bb);
      out[i] = s + (err + lo[i]);
    }
    return out;
  }
};

}  // namespace detail

struct RRMResult {
  dynamics::Trajectory trajectory;  // times hold the iteration index n
  // ||v(x_{n+1/2}) - v(x_n)|| at recorded iterations (zero for vanilla).
  std::vector<double> implied_bias_norm;
  Vector bias;
  std::uint64_t seed = 0;
};

/// Runs the recursion for cfg.horizon steps, recording every
/// record_stride-th iterate (plus the first and last).
template <typename Field>
RRMResult rrm_run(const RRMConfig& cfg, const Field& field) {
  auto problems = validate_schedule(cfg);
  if (!problems.empty() && !cfg.override_schedule) {
    std::string msg = "step-size schedule rejected:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw PreconditionError(msg);
  }
  if (cfg.record_stride < 1) throw UsageError("record_stride must be >= 1");
  if (cfg.horizon < 0) throw UsageError("horizon must be >= 0");
  if (field.m() != cfg.m) throw UsageError("field dimension does not match m");
  const int m = cfg.m;
  const Vector x0 = cfg.x0.value_or(Vector::Ones(m));
  if (x0.size() != m) throw UsageError("x0 has the wrong dimension");
  parametric::FeasibleParams(x0, cfg.delta).require_feasible(1e-9);
  const Vector shift = cfg.dual_shift.value_or(Vector::Zero(m));
  if (shift.size() != m) throw UsageError("dual_shift has the wrong dimension");

  RRMResult res;
  res.seed = cfg.seed;
  auto& traj = res.trajectory;
  traj.m = m;
  traj.delta = cfg.delta;
  traj.x_star = parametric::equilibrium_params(m);
  if (cfg.horizon == 0) return res;

  std::mt19937_64 rng(cfg.seed);
  res.bias = draw_bias(cfg, rng);
  const auto* cert = cfg.certificate ? &*cfg.certificate : nullptr;
  auto Q = [&](const Vector& y) { return geometry::project_feasible(y, cfg.delta); };
  auto step = [&](long n) {
    return cfg.constant_step ? *cfg.constant_step : std::pow(static_cast<double>(n), -cfg.l_gamma);
  };

  // The dual state starts at x0 + c; for feasible x0, Q(y_0 + c - c) = x0.
  detail::DualState dual(x0);
  if (cfg.dual_shift) dual.add(shift);
  const bool accumulate = cfg.projection_style == ProjectionStyle::dual_accumulation;
  // Point the next step is taken from: the dual state minus the shift, or x_n.
  auto base = [&](const Vector& x) { return accumulate ? dual.minus(shift) : x; };

  Vector x = x0;
  Vector previous_signal = Vector::Zero(m);
  traj.record(0.0, x, cert);
  res.implied_bias_norm.push_back(0.0);
  for (long n = 1; n <= cfg.horizon; ++n) {
    const double g = step(n);
    Vector signal;
    double implied = 0.0;
    switch (cfg.variant) {
      case Variant::vanilla:
        signal = sample_signal(x, n, cfg, rng, res.bias, field).value;
        break;
      case Variant::optimistic: {
        const Vector half = Q(base(x) + g * previous_signal);
        const auto s = sample_signal(half, n, cfg, rng, res.bias, field);
        implied = (s.field - field(x)).norm();
        signal = s.value;
        previous_signal = signal;
        break;
      }
      case Variant::extra_gradient: {
        const auto lead = sample_signal(x, n, cfg, rng, res.bias, field);
        const Vector half = Q(base(x) + g * lead.value);
        const auto s = sample_signal(half, n, cfg, rng, res.bias, field);
        implied = (s.field - lead.field).norm();
        signal = s.value;
        break;
      }
    }
    if (!signal.allFinite()) {
      traj.aborted = true;
      traj.abort_reason = "non-finite signal at n=" + std::to_string(n);
      break;
    }
    if (accumulate) {
      dual.add(g * signal);
      x = Q(dual.minus(shift));
    } else {
      x = Q(x + g * signal);
    }
    if (n % cfg.record_stride == 0 || n == cfg.horizon) {
      traj.record(static_cast<double>(n), x, cert);
      res.implied_bias_norm.push_back(implied);
    }
  }
  return res;
}

inline RRMResult rrm_run(const RRMConfig& cfg) { return rrm_run(cfg, parametric::GameField<>(cfg.m)); }

/// Independent runs for each seed, executed concurrently.
inline std::vector<RRMResult> rrm_sweep(const RRMConfig& cfg, const std::vector<std::uint64_t>& seeds) {
  std::vector<std::future<RRMResult>> jobs;
  jobs.reserve(seeds.size());
  for (auto seed : seeds) {
    RRMConfig c = cfg;
    c.seed = seed;
    jobs.push_back(std::async(std::launch::async, [c] { return rrm_run(c); }));
  }
  std::vector<RRMResult> out;
  out.reserve(seeds.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

struct ConvergenceStats {
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double tail_mean_distance = 0.0;
  std::optional<double> tail_max_lyapunov;
  // First recorded time at which the distance is within `ball`.
  std::optional<double> hitting_time;
};

/// Summary over the last tail_fraction of the recorded states.
inline ConvergenceStats convergence_stats(const dynamics::Trajectory& traj, double tail_fraction = 0.1,
                                          double ball = 0.05) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw UsageError("tail_fraction must lie in (0, 1]");
  if (traj.empty()) throw UsageError("convergence statistics need a nonempty trajectory");
  const std::size_t n = traj.size();
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  ConvergenceStats st;
  st.initial_distance = traj.distance_to_eq.front();
  st.final_distance = traj.distance_to_eq.back();
  double sum = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) sum += traj.distance_to_eq[k];
  st.tail_mean_distance = sum / static_cast<double>(tail);
  if (traj.lyapunov.size() == n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = n - tail; k < n; ++k) mx = std::max(mx, traj.lyapunov[k]);
    st.tail_max_lyapunov = mx;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (traj.distance_to_eq[k] <= ball) {
      st.hitting_time = traj.times[k];
      break;
    }
  }
  return st;
}

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::vanilla:
      return "vanilla";
    case Variant::optimistic:
      return "optimistic";
    case Variant::extra_gradient:
      return "extra_gradient";
  }
  return "?";
}

inline std::string to_string(ProjectionStyle p) {
  return p == ProjectionStyle::greedy ? "greedy" : "dual_accumulation";
}

inline std::string to_string(BiasMode b) {
  switch (b) {
    case BiasMode::unit:
      return "unit";
    case BiasMode::ball:
      return "ball";
    case BiasMode::none:
      return "none";
  }
  return "?";
}

inline Variant parse_variant(const std::string& s) {
  if (s == "vanilla") return Variant::vanilla;
  if (s == "optimistic") return Variant::optimistic;
  if (s == "extra_gradient" || s == "extra-gradient") return Variant::extra_gradient;
  throw UsageError("unknown variant '" + s + "' (vanilla, optimistic, extra_gradient)");
}

inline ProjectionStyle parse_projection_style(const std::string& s) {
  if (s == "greedy") return ProjectionStyle::greedy;
  if (s == "dual_accumulation" || s == "dual") return ProjectionStyle::dual_accumulation;
  throw UsageError("unknown projection_style '" + s + "' (greedy, dual_accumulation)");
}

inline BiasMode parse_bias_mode(const std::string& s) {
  if (s == "unit" || s == "random_unit") return BiasMode::unit;
  if (s == "ball") return BiasMode::ball;
  if (s == "none") return BiasMode::none;
  throw UsageError("unknown bias_mode '" + s + "' (unit, ball, none)");
}

}  // namespace bertrand::rrm

#endif  // BERTRAND_RRM_HPP
