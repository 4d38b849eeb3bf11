#ifndef BERTRAND_IO_HPP
#define BERTRAND_IO_HPP

// CSV / JSON / plain-text serialization for trajectories, vector fields,
// learning configurations and certificates. Floats carry 17 significant digits.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bertrand/certificate.hpp"
#include "bertrand/common.hpp"
#include "bertrand/dynamics.hpp"
#include "bertrand/rrm.hpp"

namespace bertrand::io {

using json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trajectory_header(int m, const std::string& index_name = "iter") {
  std::string h = index_name;
  for (int i = 1; i <= m; ++i) h += ",x_" + std::to_string(i);
  return h + ",dist_to_eq,lyapunov";
}

/// One row per recorded state; the lyapunov cell is empty without a certificate.
inline void write_trajectory_csv(std::ostream& out, const dynamics::Trajectory& traj,
                                 const std::string& index_name = "iter") {
  out << trajectory_header(traj.m, index_name) << '\n';
  const bool has_l = traj.lyapunov.size() == traj.size();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << fmt(traj.times[k]);
    for (int i = 0; i < traj.m; ++i) out << ',' << fmt(traj.states[k][i]);
    out << ',' << fmt(traj.distance_to_eq[k]) << ',';
    if (has_l) out << fmt(traj.lyapunov[k]);
    out << '\n';
  }
}

/// Infeasible samples keep their coordinates and leave the field cells empty.
inline void write_field_csv(std::ostream& out, const std::vector<dynamics::FieldSample>& samples) {
  out << "x1,x2,v1,v2,pv1,pv2,feasible\n";
  for (const auto& s : samples) {
    out << fmt(s.x[0]) << ',' << fmt(s.x[1]) << ',';
    if (s.feasible) {
      out << fmt((*s.v)[0]) << ',' << fmt((*s.v)[1]) << ',' << fmt((*s.projected_v)[0]) << ','
          << fmt((*s.projected_v)[1]) << ",1\n";
    } else {
      out << ",,,,0\n";
    }
  }
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

// ---------------------------------------------------------------------------
// Learning configuration.

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"m",       "delta", "l_gamma",  "l_sigma",  "l_b",      "variant",
                                             "projection_style", "horizon", "seed", "noise_on", "bias_mode",
                                             "record_stride"};
  return keys;
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw UsageError("config key '" + key + "' expects a boolean, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) throw UsageError("config key '" + key + "' expects a number, got '" + v + "'");
  return out;
}

inline std::string valid_keys_list() {
  std::string s;
  for (const auto& k : config_keys()) s += (s.empty() ? "" : ", ") + k;
  return s;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Applies one key=value setting; unknown keys are a usage error that lists
/// the valid ones.
inline void apply_config_value(rrm::RRMConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "m") {
    cfg.m = detail::parse_number<int>(key, value);
  } else if (key == "delta") {
    cfg.delta = detail::parse_number<double>(key, value);
  } else if (key == "l_gamma") {
    cfg.l_gamma = detail::parse_number<double>(key, value);
  } else if (key == "l_sigma") {
    cfg.l_sigma = detail::parse_number<double>(key, value);
  } else if (key == "l_b") {
    cfg.l_b = detail::parse_number<double>(key, value);
  } else if (key == "variant") {
    cfg.variant = rrm::parse_variant(value);
  } else if (key == "projection_style") {
    cfg.projection_style = rrm::parse_projection_style(value);
  } else if (key == "horizon") {
    cfg.horizon = detail::parse_number<long>(key, value);
  } else if (key == "seed") {
    cfg.seed = detail::parse_number<std::uint64_t>(key, value);
  } else if (key == "noise_on") {
    cfg.noise_on = detail::parse_bool(key, value);
  } else if (key == "bias_mode") {
    cfg.bias_mode = rrm::parse_bias_mode(value);
  } else if (key == "record_stride") {
    cfg.record_stride = detail::parse_number<int>(key, value);
  } else {
    throw UsageError("unknown config key '" + key + "'; valid keys: " + detail::valid_keys_list());
  }
}

inline json config_to_json(const rrm::RRMConfig& cfg) {
  return json{{"m", cfg.m},
              {"delta", cfg.delta},
              {"l_gamma", cfg.l_gamma},
              {"l_sigma", cfg.l_sigma},
              {"l_b", cfg.l_b},
              {"variant", rrm::to_string(cfg.variant)},
              {"projection_style", rrm::to_string(cfg.projection_style)},
              {"horizon", cfg.horizon},
              {"seed", cfg.seed},
              {"noise_on", cfg.noise_on},
              {"bias_mode", rrm::to_string(cfg.bias_mode)},
              {"record_stride", cfg.record_stride}};
}

inline void apply_config_json(rrm::RRMConfig& cfg, const json& j) {
  if (!j.is_object()) throw UsageError("JSON config must be an object");
  for (const auto& [key, val] : j.items()) {
    if (val.is_string()) {
      apply_config_value(cfg, key, val.get<std::string>());
    } else if (val.is_boolean()) {
      apply_config_value(cfg, key, val.get<bool>() ? "true" : "false");
    } else if (val.is_number_float()) {
      apply_config_value(cfg, key, fmt(val.get<double>()));
    } else if (val.is_number()) {
      apply_config_value(cfg, key, val.dump());
    } else {
      throw UsageError("config key '" + key + "' has an unsupported JSON type");
    }
  }
}

/// Reads either flat `key = value` lines ('#' starts a comment) or a JSON
/// run summary, whose "config" object is applied.
inline void apply_config_text(rrm::RRMConfig& cfg, const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("malformed JSON config: ") + e.what());
    }
    apply_config_json(cfg, j.contains("config") ? j.at("config") : j);
    return;
  }
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    apply_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline json stats_to_json(const rrm::ConvergenceStats& st) {
  json j{{"initial_distance", st.initial_distance},
         {"final_distance", st.final_distance},
         {"tail_mean_distance", st.tail_mean_distance}};
  j["tail_max_lyapunov"] = st.tail_max_lyapunov ? json(*st.tail_max_lyapunov) : json(nullptr);
  j["hitting_time"] = st.hitting_time ? json(*st.hitting_time) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Certificates:
//   m <int>
//   w <real>
//   x_star <m reals>
//   H
//   <m rows of m reals>

inline void write_certificate(std::ostream& out, const lyapunov::QuadraticCertificate& cert) {
  const int m = cert.m();
  out << "m " << m << '\n' << "w " << fmt(cert.w) << '\n' << "x_star";
  for (int i = 0; i < m; ++i) out << ' ' << fmt(cert.x_star[i]);
  out << "\nH\n";
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) out << (c ? " " : "") << fmt(cert.H(r, c));
    out << '\n';
  }
}

inline lyapunov::QuadraticCertificate read_certificate(std::istream& in) {
  std::string tag;
  int m = 0;
  double w = 0.0;
  if (!(in >> tag >> m) || tag != "m" || m < 1) throw UsageError("certificate: expected 'm <int>'");
  if (!(in >> tag >> w) || tag != "w") throw UsageError("certificate: expected 'w <real>'");
  if (!(in >> tag) || tag != "x_star") throw UsageError("certificate: expected 'x_star'");
  Vector x_star(m);
  for (int i = 0; i < m; ++i) {
    if (!(in >> x_star[i])) throw UsageError("certificate: short x_star row");
  }
  if (!(in >> tag) || tag != "H") throw UsageError("certificate: expected 'H'");
  Matrix H(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      if (!(in >> H(r, c))) throw UsageError("certificate: H must have " + std::to_string(m * m) + " entries");
    }
  }
  return lyapunov::QuadraticCertificate::make(H, x_star, w);
}

}  // namespace bertrand::io

#endif  // BERTRAND_IO_HPP
