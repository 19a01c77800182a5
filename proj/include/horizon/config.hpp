#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/catalog.hpp"
#include "horizon/errors.hpp"
#include "horizon/increments.hpp"
#include "horizon/version.hpp"
#include "horizon/walker.hpp"

namespace horizon {

/// Flat key-value run configuration. `out` and `threads` are execution
/// parameters carried alongside but excluded from the canonical emitted
/// form (results must not depend on them).
struct RunConfig {
  std::string manifold = "euclidean";
  std::string law = "sphere_uniform";
  double alpha = 0.1;
  double t = 1.0;
  std::string mode = "discrete_rescaled";
  std::uint64_t replicas = 1;
  std::uint64_t seed = 0;
  std::vector<double> initial;  // empty -> catalog default
  int record_points = 1000;
  double integrator_step = 0.0;  // 0 -> min(1e-3, alpha/50)
  double max_arclength = 10.0;
  double sphere_epsilon = 1e-3;
  double fd_step = 1e-3;
  bool richardson = false;
  std::uint64_t samples = 1000000;
  std::vector<double> alphas = {0.2, 0.1, 0.05, 0.025};
  std::vector<std::string> functions;  // empty -> manifold catalog
  std::vector<double> t_grid = {0.25, 0.5, 1.0};
  std::string generator_mode = "deterministic";
  std::string format_version = kFormatVersion;

  // execution parameters (not part of the canonical config)
  std::string out = "out";
  int threads = 0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "alpha",      "alphas",          "fd_step",   "format_version", "functions",
      "generator_mode", "initial",     "integrator_step", "law",      "manifold",
      "max_arclength",  "mode",        "record_points",   "replicas", "richardson",
      "samples",    "seed",            "sphere_epsilon",  "t",        "t_grid"};
  return keys;
}

inline std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& k : config_keys()) {
    const std::size_t d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best_d <= 3 ? best : std::string{};
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(key, "expected a number, got '" + value + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(key, "expected a non-negative integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError(key, "expected true|false, got '" + value + "'");
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream is(value);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(key, tok));
  return out;
}

inline std::vector<std::string> parse_string_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream is(value);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

template <typename T>
inline std::string join_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    if constexpr (std::is_same_v<T, double>)
      out += format_double(xs[i]);
    else
      out += xs[i];
  }
  return out;
}

}  // namespace detail

inline void validate_config(const RunConfig& c) {
  chart_by_name(c.manifold, c.sphere_epsilon);  // throws ValidationError("manifold")
  IncrementLaw::from_name(c.law);
  time_mode_from_name(c.mode);
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw ValidationError("alpha", "must be in (0, 1]");
  if (!(c.t >= 0.0)) throw ValidationError("t", "must be >= 0");
  if (c.replicas < 1) throw ValidationError("replicas", "must be >= 1");
  if (c.record_points < 1) throw ValidationError("record_points", "must be >= 1");
  if (!(c.integrator_step >= 0.0)) throw ValidationError("integrator_step", "must be >= 0 (0 = auto)");
  if (!(c.max_arclength > 0.0)) throw ValidationError("max_arclength", "must be > 0");
  if (!(c.sphere_epsilon > 0.0 && c.sphere_epsilon < 1.0)) throw ValidationError("sphere_epsilon", "must be in (0, 1)");
  if (!(c.fd_step > 0.0)) throw ValidationError("fd_step", "must be > 0");
  if (c.samples < 1) throw ValidationError("samples", "must be >= 1");
  if (!c.initial.empty() && c.initial.size() != 2) throw ValidationError("initial", "expected 2 coordinates");
  for (double a : c.alphas)
    if (!(a > 0.0 && a <= 1.0)) throw ValidationError("alphas", "entries must be in (0, 1]");
  for (std::size_t i = 1; i < c.alphas.size(); ++i)
    if (!(c.alphas[i] < c.alphas[i - 1])) throw ValidationError("alphas", "entries must be strictly decreasing");
  for (double tv : c.t_grid)
    if (!(tv >= 0.0)) throw ValidationError("t_grid", "entries must be >= 0");
  if (c.generator_mode != "deterministic" && c.generator_mode != "monte_carlo")
    throw ValidationError("generator_mode", "expected deterministic|monte_carlo");
  if (c.format_version != kFormatVersion)
    throw ValidationError("format_version", "this binary writes schema version " + std::string(kFormatVersion));
}

/// Canonical emitted form: sorted keys, one `key = value` per line.
/// parse_config(emit_config(c)) reproduces c exactly.
inline std::string emit_config(const RunConfig& c) {
  using detail::format_double;
  using detail::join_list;
  std::ostringstream os;
  os << "alpha = " << format_double(c.alpha) << "\n";
  os << "alphas = " << join_list(c.alphas) << "\n";
  os << "fd_step = " << format_double(c.fd_step) << "\n";
  os << "format_version = " << c.format_version << "\n";
  os << "functions = " << join_list(c.functions) << "\n";
  os << "generator_mode = " << c.generator_mode << "\n";
  os << "initial = " << join_list(c.initial) << "\n";
  os << "integrator_step = " << format_double(c.integrator_step) << "\n";
  os << "law = " << c.law << "\n";
  os << "manifold = " << c.manifold << "\n";
  os << "max_arclength = " << format_double(c.max_arclength) << "\n";
  os << "mode = " << c.mode << "\n";
  os << "record_points = " << c.record_points << "\n";
  os << "replicas = " << c.replicas << "\n";
  os << "richardson = " << (c.richardson ? "true" : "false") << "\n";
  os << "samples = " << c.samples << "\n";
  os << "seed = " << c.seed << "\n";
  os << "sphere_epsilon = " << format_double(c.sphere_epsilon) << "\n";
  os << "t = " << format_double(c.t) << "\n";
  os << "t_grid = " << join_list(c.t_grid) << "\n";
  return os.str();
}

/// Parses the flat `key = value` format (# starts a comment). Unknown keys
/// are rejected with a nearest-key suggestion; values are validated with the
/// offending key named.
inline RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", lineno, detail::trim(raw).size());
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("missing key before '='", lineno, 1);

    if (key == "manifold") c.manifold = value;
    else if (key == "law") c.law = value;
    else if (key == "alpha") c.alpha = detail::parse_double(key, value);
    else if (key == "t") c.t = detail::parse_double(key, value);
    else if (key == "mode") c.mode = value;
    else if (key == "replicas") c.replicas = detail::parse_u64(key, value);
    else if (key == "seed") c.seed = detail::parse_u64(key, value);
    else if (key == "initial") c.initial = detail::parse_double_list(key, value);
    else if (key == "record_points") c.record_points = static_cast<int>(detail::parse_u64(key, value));
    else if (key == "integrator_step") c.integrator_step = detail::parse_double(key, value);
    else if (key == "max_arclength") c.max_arclength = detail::parse_double(key, value);
    else if (key == "sphere_epsilon") c.sphere_epsilon = detail::parse_double(key, value);
    else if (key == "fd_step") c.fd_step = detail::parse_double(key, value);
    else if (key == "richardson") c.richardson = detail::parse_bool(key, value);
    else if (key == "samples") c.samples = detail::parse_u64(key, value);
    else if (key == "alphas") c.alphas = detail::parse_double_list(key, value);
    else if (key == "functions") c.functions = detail::parse_string_list(value);
    else if (key == "t_grid") c.t_grid = detail::parse_double_list(key, value);
    else if (key == "generator_mode") c.generator_mode = value;
    else if (key == "format_version") c.format_version = value;
    else {
      const std::string near = detail::nearest_key(key);
      throw ValidationError(key, near.empty() ? "unknown key" : "unknown key; did you mean '" + near + "'?");
    }
  }
  validate_config(c);
  return c;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return emit_config(a) == emit_config(b); }

inline WalkConfig make_walk_config(const RunConfig& rc) {
  validate_config(rc);
  WalkConfig w;
  w.chart = chart_by_name(rc.manifold, rc.sphere_epsilon);
  w.law = IncrementLaw::from_name(rc.law);
  w.alpha = rc.alpha;
  w.horizon_t = rc.t;
  w.mode = time_mode_from_name(rc.mode);
  if (!rc.initial.empty()) {
    w.initial.resize(static_cast<int>(rc.initial.size()));
    for (std::size_t i = 0; i < rc.initial.size(); ++i) w.initial[static_cast<int>(i)] = rc.initial[i];
  }
  w.geo.step = rc.integrator_step;
  w.geo.max_arclength = rc.max_arclength;
  w.master_seed = rc.seed;
  w.replica_count = rc.replicas;
  w.record_points = rc.record_points;
  w.threads = rc.threads;
  return w;
}

}  // namespace horizon
