// Experiment runner: equilibrium prices, gradients, Minty checks, vector
// fields, projected dynamics, stochastic learning and Lyapunov certificates.
//
// Exit codes: 0 success, 1 verification failure or runtime error, 2 usage error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bertrand/dynamics.hpp"
#include "bertrand/io.hpp"
#include "bertrand/lyapunov.hpp"
#include "bertrand/model.hpp"
#include "bertrand/parametric.hpp"
#include "bertrand/rrm.hpp"
#include "bertrand/variational.hpp"

namespace fs = std::filesystem;
using namespace bertrand;
using io::fmt;
using io::json;

namespace {

constexpr int kVerificationFailed = 1;

struct Common {
  std::string out_dir;

  fs::path dir() const {
    std::string d = out_dir;
    if (d.empty()) {
      const char* env = std::getenv("BERTRAND_OUTPUT_DIR");
      d = env != nullptr && *env != '\0' ? env : "out";
    }
    fs::create_directories(d);
    return d;
  }
};

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), v.size()); }

std::string vec_str(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + ")";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --------------------------------------------------------------------------

struct BneArgs {
  int n_firms = 2;
  double power = 1.0;
  int res = 101;
};

int run_bne(const Common& common, const BneArgs& a) {
  const auto prior = a.power == 1.0 ? model::CostPrior::uniform(a.n_firms) : model::CostPrior::power(a.power, a.n_firms);
  prior.validate();
  if (a.res < 2) throw UsageError("--res must be >= 2");
  const auto path = common.dir() / "bne.csv";
  auto f = io::open_output(path);
  f << "c,bne\n";
  for (int k = 0; k < a.res; ++k) {
    const double c = static_cast<double>(k) / (a.res - 1);
    f << fmt(c) << ',' << fmt(model::bne(prior, c)) << '\n';
  }
  std::cout << "bne: beta*(0) = " << fmt(model::bne(prior, 0.0)) << ", beta*(0.5) = " << fmt(model::bne(prior, 0.5))
            << ", " << a.res << " samples -> " << path.string() << '\n';
  return 0;
}

struct GradientArgs {
  std::vector<double> x;
  double delta = 0.1;
  std::string mode = "quadrature";
};

int run_gradient(const GradientArgs& a) {
  if (a.x.empty()) throw UsageError("--x is required");
  const parametric::FeasibleParams fp(to_vector(a.x), a.delta);
  fp.require_feasible();
  Vector v;
  if (a.mode == "fd") {
    v = parametric::game_gradient_fd(fp);
  } else if (a.mode == "quadrature") {
    v = parametric::game_gradient(fp);
  } else if (a.mode == "closed_m1") {
    v = parametric::game_gradient(fp, parametric::AllOrNothing{}, parametric::GradientMode::closed_m1);
  } else if (a.mode == "closed_m2") {
    v = parametric::game_gradient(fp, parametric::AllOrNothing{}, parametric::GradientMode::closed_m2);
  } else {
    throw UsageError("unknown gradient mode '" + a.mode + "' (quadrature, closed_m1, closed_m2, fd)");
  }
  std::cout << "gradient: v" << vec_str(fp.x) << " = " << vec_str(v) << '\n';
  return 0;
}

int run_minty(int k) {
  const double lhs = variational::minty_lhs(variational::minty_counterexample(k),
                                            model::PiecewiseLinearStrategy::uniform_bne());
  std::cout << "minty: k = " << k << ", lhs = " << fmt(lhs) << ", " << (lhs > 0.0 ? "VIOLATED" : "HOLDS") << '\n';
  return 0;
}

struct FieldArgs {
  int m = 2;
  double delta = 0.1;
  int res = 40;
};

int run_field(const Common& common, const FieldArgs& a) {
  if (a.m != 2) throw UsageError("field sampling is only available for m = 2");
  const parametric::GameField<> field(2);
  const auto samples = dynamics::sample_vector_field(dynamics::polytope_box(a.delta), a.res, a.delta, field);
  const auto path = common.dir() / "field.csv";
  auto f = io::open_output(path);
  io::write_field_csv(f, samples);
  std::size_t feasible = 0;
  for (const auto& s : samples) feasible += s.feasible ? 1 : 0;
  std::cout << "field: " << samples.size() << " samples (" << feasible << " feasible) -> " << path.string() << '\n';
  return 0;
}

struct OdeArgs {
  int m = 2;
  double delta = 0.1;
  std::vector<double> x0;
  double step = 1e-3;
  double horizon = 200.0;
  int stride = 100;
};

int run_ode(const Common& common, const OdeArgs& a) {
  const Vector x0 = a.x0.empty() ? Vector(Vector::Ones(a.m)) : to_vector(a.x0);
  if (x0.size() != a.m) throw UsageError("--x0 must have m entries");
  dynamics::IntegrationOptions opts;
  opts.stride = a.stride;
  if (a.m == 2) opts.certificate = lyapunov::reference_certificate(a.delta);
  const parametric::GameField<> field(a.m);
  const auto traj = dynamics::integrate_projected(x0, a.horizon, a.step, field, a.delta, opts);
  const auto path = common.dir() / "ode_trajectory.csv";
  auto f = io::open_output(path);
  io::write_trajectory_csv(f, traj, "t");
  std::cout << "ode: m = " << a.m << ", final state " << vec_str(traj.final_state()) << ", distance "
            << fmt(traj.distance_to_eq.back()) << (traj.aborted ? " (aborted: " + traj.abort_reason + ")" : "")
            << " -> " << path.string() << '\n';
  return traj.aborted ? kVerificationFailed : 0;
}

struct LearnArgs {
  std::string preset;
  std::string config;
  int m = 0;
  int seeds = 1;
  long horizon = -1;
  std::string variant;
  std::string projection;
  int stride = 0;
  double tail = 0.1;
};

rrm::RRMConfig build_config(const LearnArgs& a, std::uint64_t base_seed) {
  if (!a.preset.empty() && a.preset != "paper") {
    throw UsageError("unknown preset '" + a.preset + "' (the only preset is 'paper')");
  }
  rrm::RRMConfig cfg = rrm::experiment_preset(2, base_seed);
  cfg.record_stride = 100;
  if (!a.config.empty()) io::apply_config_text(cfg, io::read_file(a.config));
  if (a.m > 0) cfg.m = a.m;
  if (a.horizon >= 0) cfg.horizon = a.horizon;
  if (!a.variant.empty()) cfg.variant = rrm::parse_variant(a.variant);
  if (!a.projection.empty()) cfg.projection_style = rrm::parse_projection_style(a.projection);
  if (a.stride > 0) cfg.record_stride = a.stride;
  if (cfg.m == 2) cfg.certificate = lyapunov::reference_certificate(cfg.delta);
  return cfg;
}

int run_learn(const Common& common, const LearnArgs& a, std::uint64_t seed_flag, bool seed_given) {
  auto cfg = build_config(a, 0);
  if (seed_given) cfg.seed = seed_flag;
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  const auto dir = common.dir();
  const auto t0 = std::chrono::steady_clock::now();
  json stats = json::array();
  std::vector<std::uint64_t> seeds;
  auto conv = io::open_output(dir / "learn_convergence.csv");
  conv << "seed,final_distance,tail_mean_distance,hitting_time\n";
  for (int s = 0; s < a.seeds; ++s) {
    rrm::RRMConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(s);
    seeds.push_back(c.seed);
    const auto res = rrm::rrm_run(c);
    auto f = io::open_output(dir / ("learn_m" + std::to_string(c.m) + "_seed" + std::to_string(c.seed) + ".csv"));
    io::write_trajectory_csv(f, res.trajectory);
    const auto st = rrm::convergence_stats(res.trajectory, a.tail);
    conv << c.seed << ',' << fmt(st.final_distance) << ',' << fmt(st.tail_mean_distance) << ','
         << (st.hitting_time ? fmt(*st.hitting_time) : "") << '\n';
    auto js = io::stats_to_json(st);
    js["seed"] = c.seed;
    stats.push_back(js);
  }
  json summary{{"command", "learn"},
               {"config", io::config_to_json(cfg)},
               {"seeds", seeds},
               {"tail_fraction", a.tail},
               {"stats", stats},
               {"wall_time_s", seconds_since(t0)}};
  auto js = io::open_output(dir / "learn_summary.json");
  js << summary.dump(2) << '\n';
  double worst = 0.0;
  for (const auto& s : stats) worst = std::max(worst, s["final_distance"].get<double>());
  std::cout << "learn: m = " << cfg.m << ", " << a.seeds << " seed(s), worst final distance " << fmt(worst) << " -> "
            << dir.string() << '\n';
  return 0;
}

struct SweepArgs {
  std::vector<int> ms{2, 3, 4};
  int seeds = 4;
  long horizon = 100000;
  std::string variant = "vanilla";
};

int run_sweep(const Common& common, const SweepArgs& a) {
  if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto path = common.dir() / "sweep.csv";
  auto f = io::open_output(path);
  f << "m,seed,final_distance,tail_mean_distance,hitting_time\n";
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < a.seeds; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
  double worst = 0.0;
  for (int m : a.ms) {
    auto cfg = rrm::experiment_preset(m);
    cfg.horizon = a.horizon;
    cfg.variant = rrm::parse_variant(a.variant);
    cfg.record_stride = 100;
    for (const auto& res : rrm::rrm_sweep(cfg, seeds)) {
      const auto st = rrm::convergence_stats(res.trajectory);
      worst = std::max(worst, st.final_distance);
      f << m << ',' << res.seed << ',' << fmt(st.final_distance) << ',' << fmt(st.tail_mean_distance) << ','
        << (st.hitting_time ? fmt(*st.hitting_time) : "") << '\n';
    }
  }
  std::cout << "sweep: " << a.ms.size() << " value(s) of m x " << a.seeds << " seed(s), worst final distance "
            << fmt(worst) << ", " << fmt(seconds_since(t0)) << " s -> " << path.string() << '\n';
  return 0;
}

struct VerifyArgs {
  double delta = 0.1;
  int res = 200;
  int facet_points = 200;
  std::string cert;
};

int run_verify(const VerifyArgs& a) {
  auto cert = lyapunov::reference_certificate(a.delta);
  if (!a.cert.empty()) {
    std::ifstream in(a.cert);
    if (!in) throw UsageError("cannot read certificate '" + a.cert + "'");
    cert = io::read_certificate(in);
  }
  const parametric::GameField<> field(cert.m());
  const auto rep = lyapunov::verify_certificate(cert, a.delta, a.res, field, a.facet_points);
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  auto line = [](const char* name, const lyapunov::ConditionResult& r) {
    std::cout << "  " << name << ": margin " << fmt(r.margin);
    if (r.witness && r.margin < 0.0) std::cout << " at " << vec_str(*r.witness);
    std::cout << '\n';
  };
  std::cout << "lyapunov-verify: m = " << cert.m() << ", w = " << fmt(cert.w) << ", " << rep.interior_points
            << " grid + " << rep.facet_points << " facet points: " << (rep.passed() ? "PASS" : "FAIL") << '\n';
  line("bounds", rep.bounds);
  line("decrease", rep.decrease);
  line("boundary", rep.boundary);
  if (rep.boundary_analytic) std::cout << "  boundary (facet endpoints): margin " << fmt(*rep.boundary_analytic) << '\n';
  if (cert.m() == 2 && a.cert.empty()) {
    const auto d = lyapunov::decomposition_check(lyapunov::reference_decomposition(), a.delta);
    std::cout << "  cubic expansion residual " << fmt(d.expansion_residual)
              << ", printed multiplier residual " << fmt(d.decomposition_residual) << '\n';
  }
  return rep.passed() ? 0 : kVerificationFailed;
}

struct SearchArgs {
  int m = 2;
  double delta = 0.1;
  double w = 0.05;
  int res = 30;
  double entry_bound = 100.0;
  bool round = false;
};

int run_search(const Common& common, const SearchArgs& a) {
  const parametric::GameField<> field(a.m);
  lyapunov::SearchOptions opts;
  opts.entry_bound = a.entry_bound;
  opts.round_to_integer = a.round;
  try {
    const auto res = lyapunov::search_certificate_lp(a.m, a.delta, a.w, a.res, field, opts);
    const auto path = common.dir() / "certificate.txt";
    auto f = io::open_output(path);
    io::write_certificate(f, res.certificate);
    std::cout << "lyapunov-search: certificate found, margin = " << fmt(res.margin) << ", " << res.pivots
              << " pivots -> " << path.string() << '\n';
    return 0;
  } catch (const NoCertificateError& e) {
    std::cout << "lyapunov-search: no certificate: " << e.what() << '\n';
    return kVerificationFailed;
  } catch (const GridTooCoarseError& e) {
    std::cout << "lyapunov-search: " << e.what() << '\n';
    return kVerificationFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian Bertrand duopoly: equilibria, learning dynamics and Lyapunov certificates"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out_dir, "Output directory (default: $BERTRAND_OUTPUT_DIR or ./out)");

  BneArgs bne_args;
  auto* bne = app.add_subcommand("bne", "Tabulate the symmetric equilibrium price beta*(c)");
  bne->add_option("--firms", bne_args.n_firms, "Number of firms")->check(CLI::Range(2, 64));
  bne->add_option("--power", bne_args.power, "Cost prior F(c) = c^a")->check(CLI::PositiveNumber);
  bne->add_option("--res", bne_args.res, "Number of cost samples");

  GradientArgs grad_args;
  auto* grad = app.add_subcommand("gradient", "Evaluate the game gradient v(x)");
  grad->add_option("--x", grad_args.x, "Slope vector")->required()->expected(1, -1);
  grad->add_option("--delta", grad_args.delta, "Minimum slope");
  grad->add_option("--mode", grad_args.mode, "quadrature | closed_m1 | closed_m2 | fd");

  int minty_k = 0;
  auto* minty = app.add_subcommand("minty", "Minty inequality at the k-th counterexample");
  minty->add_option("--k", minty_k, "Counterexample index")->check(CLI::NonNegativeNumber);

  FieldArgs field_args;
  auto* field = app.add_subcommand("field", "Sample the m = 2 vector field on a grid");
  field->add_option("--m", field_args.m, "Number of pieces (2 only)");
  field->add_option("--delta", field_args.delta, "Minimum slope");
  field->add_option("--res", field_args.res, "Samples per axis")->check(CLI::Range(2, 2000));

  OdeArgs ode_args;
  auto* ode = app.add_subcommand("ode", "Integrate the projected dynamics with projected Euler");
  ode->add_option("--m", ode_args.m, "Number of pieces")->check(CLI::Range(1, 64));
  ode->add_option("--delta", ode_args.delta, "Minimum slope");
  ode->add_option("--x0", ode_args.x0, "Initial slopes (default all ones)")->expected(1, -1);
  ode->add_option("--step", ode_args.step, "Euler step h");
  ode->add_option("--horizon", ode_args.horizon, "Integration horizon");
  ode->add_option("--stride", ode_args.stride, "Record every stride-th step")->check(CLI::PositiveNumber);

  LearnArgs learn_args;
  std::uint64_t learn_seed = 0;
  auto* learn = app.add_subcommand("learn", "Run the stochastic learning recursion for one or more seeds");
  learn->add_option("--preset", learn_args.preset, "Parameter preset: paper = delta 0.1, l_gamma 0.05, l_sigma -1, l_b 1, greedy");
  learn->add_option("--config", learn_args.config, "key=value file or JSON run summary");
  learn->add_option("--m", learn_args.m, "Number of pieces")->check(CLI::Range(1, 64));
  learn->add_option("--seeds", learn_args.seeds, "Number of consecutive seeds");
  auto* seed_opt = learn->add_option("--seed", learn_seed, "First seed");
  learn->add_option("--horizon", learn_args.horizon, "Number of iterations");
  learn->add_option("--variant", learn_args.variant, "vanilla | optimistic | extra_gradient");
  learn->add_option("--projection", learn_args.projection, "greedy | dual_accumulation");
  learn->add_option("--stride", learn_args.stride, "Record every stride-th iterate");
  learn->add_option("--tail", learn_args.tail, "Tail fraction for statistics");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("lyapunov-verify", "Check a quadratic Lyapunov certificate on a grid");
  verify->add_option("--delta", verify_args.delta, "Minimum slope");
  verify->add_option("--res", verify_args.res, "Grid points per axis")->check(CLI::Range(2, 5000));
  verify->add_option("--facet-points", verify_args.facet_points, "Samples per facet");
  verify->add_option("--cert", verify_args.cert, "Certificate file (default diag(52, 20))");

  SearchArgs search_args;
  auto* search = app.add_subcommand("lyapunov-search", "Search for a certificate by linear programming");
  search->add_option("--m", search_args.m, "Number of pieces")->check(CLI::Range(1, 8));
  search->add_option("--delta", search_args.delta, "Minimum slope");
  search->add_option("--w", search_args.w, "Required decrease rate");
  search->add_option("--res", search_args.res, "Grid points per axis")->check(CLI::Range(2, 200));
  search->add_option("--entry-bound", search_args.entry_bound, "Bound on |H_ij| (inf for none)");
  search->add_flag("--round", search_args.round, "Round H to integers before verification");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Concurrent multi-seed learning runs over several m");
  sweep->add_option("--m", sweep_args.ms, "Values of m")->expected(1, -1);
  sweep->add_option("--seeds", sweep_args.seeds, "Seeds per m");
  sweep->add_option("--horizon", sweep_args.horizon, "Iterations per run");
  sweep->add_option("--variant", sweep_args.variant, "vanilla | optimistic | extra_gradient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*bne) return run_bne(common, bne_args);
    if (*grad) return run_gradient(grad_args);
    if (*minty) return run_minty(minty_k);
    if (*field) return run_field(common, field_args);
    if (*ode) return run_ode(common, ode_args);
    if (*learn) return run_learn(common, learn_args, learn_seed, seed_opt->count() > 0);
    if (*verify) return run_verify(verify_args);
    if (*search) return run_search(common, search_args);
    if (*sweep) return run_sweep(common, sweep_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ConstraintViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
