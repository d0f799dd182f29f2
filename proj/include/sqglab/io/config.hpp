#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqglab::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective run configuration shared by all subcommands.
struct RunConfig {
  // Simulation.
  double alpha = 0.9;
  int N = 128;
  int d = 2;
  double t_end = 1.0;
  double dt = 0.0;  // 0 = automatic
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string init = "random-mean-zero";
  double init_amplitude = 1.0;
  int init_k1 = 1, init_k2 = 0, init_k3 = 0;
  int init_band = 8;
  std::string velocity = "riesz-perp";
  double mollifier_r = 0.25;
  int snapshot_stride = 10;
  bool dissipation = true;
  double cfl = 0.5;
  // Diagnostics.
  double q = 32.0;
  double beta = 0.5;
  double class_A = 5.0;
  double class_p = 32.0 / 31.0;
  // dual-pair.
  double dual_s = 0.1;
  std::string psi_init = "cos-mode";
  int psi_k1 = 1, psi_k2 = 0, psi_k3 = 0;
  std::uint64_t psi_seed = 1;
  double dual_p = 2.0;
  // holder-scan.
  std::string snapshot;
  int translate_stride = 1;
  // chain.
  double theta_sup = 1.0;
  double C = 1.0, C_q = 1.0, c = 1.0, c_prime = 1.0, C_alpha = 1.0;
  // verify-kernel.
  int lattice_radius = 20;
  int max_mode = 4;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

inline void range(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("key '" + key + "' out of range: " + what);
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  /// Text keys may be written back empty (unset) and read again.
  bool allow_empty = false;
};

template <class T>
Entry real(const char* key, T RunConfig::*m, std::function<bool(double)> ok, const char* what) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            double x = parse_double(key, v);
            range(ok(x), key, what);
            c.*m = x;
          },
          [=](const RunConfig& c) { return format_double(c.*m); }};
}

inline Entry integer(const char* key, int RunConfig::*m, std::function<bool(long)> ok, const char* what) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            long x = parse_int<long>(key, v);
            range(ok(x), key, what);
            c.*m = static_cast<int>(x);
          },
          [=](const RunConfig& c) { return std::to_string(c.*m); }};
}

inline Entry unsigned64(const char* key, std::uint64_t RunConfig::*m) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*m = parse_int<std::uint64_t>(key, v); },
          [=](const RunConfig& c) { return std::to_string(c.*m); }};
}

inline Entry choice(const char* key, std::string RunConfig::*m, std::vector<std::string> allowed) {
  return {key,
          [=](RunConfig& c, const std::string& v) {
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
              std::string list;
              for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
              throw ConfigError("key '" + std::string(key) + "': '" + v + "' is not one of " + list);
            }
            c.*m = v;
          },
          [=](const RunConfig& c) { return c.*m; }};
}

inline Entry text(const char* key, std::string RunConfig::*m) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*m = v; }, [=](const RunConfig& c) { return c.*m; }, true};
}

inline Entry boolean(const char* key, bool RunConfig::*m) {
  return {key, [=](RunConfig& c, const std::string& v) { c.*m = parse_bool(key, v); },
          [=](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

inline bool power_of_two_grid(long n) { return n >= 8 && n <= 4096 && (n & (n - 1)) == 0; }

inline const std::vector<Entry>& schema() {
  static const std::vector<std::string> fields{"random-mean-zero", "shear", "vortex-pair", "cos-mode", "zero"};
  static const std::vector<Entry> s{
      real("alpha", &RunConfig::alpha, [](double x) { return x > 0.0 && x <= 2.0; }, "must lie in (0, 2]"),
      integer("N", &RunConfig::N, power_of_two_grid, "must be a power of two in [8, 4096]"),
      integer("d", &RunConfig::d, [](long x) { return x >= 1 && x <= 3; }, "must be 1, 2 or 3"),
      real("t_end", &RunConfig::t_end, [](double x) { return x >= 0.0; }, "must be >= 0"),
      real("dt", &RunConfig::dt, [](double x) { return x >= 0.0; }, "must be >= 0 (0 selects the automatic step)"),
      real("epsilon", &RunConfig::epsilon, [](double x) { return x >= 0.0; }, "must be >= 0"),
      unsigned64("seed", &RunConfig::seed),
      choice("init", &RunConfig::init, fields),
      real("init_amplitude", &RunConfig::init_amplitude, [](double x) { return x >= 0.0; }, "must be >= 0"),
      integer("init_k1", &RunConfig::init_k1, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      integer("init_k2", &RunConfig::init_k2, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      integer("init_k3", &RunConfig::init_k3, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      integer("init_band", &RunConfig::init_band, [](long x) { return x >= 1; }, "must be >= 1"),
      choice("velocity", &RunConfig::velocity, {"riesz-perp", "mollified", "zero"}),
      real("mollifier_r", &RunConfig::mollifier_r, [](double x) { return x > 0.0 && x <= 1.0; }, "must lie in (0, 1]"),
      integer("snapshot_stride", &RunConfig::snapshot_stride, [](long x) { return x >= 1; }, "must be >= 1"),
      boolean("dissipation", &RunConfig::dissipation),
      real("cfl", &RunConfig::cfl, [](double x) { return x > 0.0 && x <= 1.0; }, "must lie in (0, 1]"),
      real("q", &RunConfig::q, [](double x) { return x > 1.0; }, "must exceed 1"),
      real("beta", &RunConfig::beta, [](double x) { return x > 0.0 && x < 1.0; }, "must lie in (0, 1)"),
      real("class_A", &RunConfig::class_A, [](double x) { return x > 1.0; }, "must exceed 1"),
      real("class_p", &RunConfig::class_p, [](double x) { return x > 1.0; }, "must exceed 1"),
      real("dual_s", &RunConfig::dual_s, [](double x) { return x >= 0.0; }, "must be >= 0"),
      choice("psi_init", &RunConfig::psi_init, fields),
      integer("psi_k1", &RunConfig::psi_k1, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      integer("psi_k2", &RunConfig::psi_k2, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      integer("psi_k3", &RunConfig::psi_k3, [](long x) { return std::labs(x) <= 2048; }, "|k| must be <= 2048"),
      unsigned64("psi_seed", &RunConfig::psi_seed),
      real("dual_p", &RunConfig::dual_p, [](double x) { return x >= 1.0; }, "must be >= 1"),
      text("snapshot", &RunConfig::snapshot),
      integer("translate_stride", &RunConfig::translate_stride, [](long x) { return x >= 1; }, "must be >= 1"),
      real("theta_sup", &RunConfig::theta_sup, [](double x) { return x >= 0.0; }, "must be >= 0"),
      real("C", &RunConfig::C, [](double x) { return x > 0.0; }, "must be positive"),
      real("C_q", &RunConfig::C_q, [](double x) { return x > 0.0; }, "must be positive"),
      real("c", &RunConfig::c, [](double x) { return x > 0.0; }, "must be positive"),
      real("c_prime", &RunConfig::c_prime, [](double x) { return x > 0.0; }, "must be positive"),
      real("C_alpha", &RunConfig::C_alpha, [](double x) { return x > 0.0; }, "must be positive"),
      integer("lattice_radius", &RunConfig::lattice_radius, [](long x) { return x >= 1 && x <= 200; }, "must lie in [1, 200]"),
      integer("max_mode", &RunConfig::max_mode, [](long x) { return x >= 1 && x <= 64; }, "must lie in [1, 64]"),
  };
  return s;
}

}  // namespace detail

/// Parses flat `key = value` text ('#' starts a comment). Unknown keys,
/// duplicates, malformed lines and out-of-range values are errors; every key
/// not given keeps its default.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key=value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    const auto& sch = detail::schema();
    auto it = std::find_if(sch.begin(), sch.end(), [&](const detail::Entry& e) { return e.key == key; });
    if (it == sch.end()) {
      std::string best;
      std::size_t bd = 1000;
      for (const auto& e : sch) {
        const std::size_t dd = detail::edit_distance(key, e.key);
        if (dd < bd) {
          bd = dd;
          best = e.key;
        }
      }
      std::string msg = where + "unknown key '" + key + "'";
      if (bd <= 2) msg += " (did you mean '" + best + "'?)";
      throw ConfigError(msg);
    }
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ConfigError(where + "duplicate key '" + key + "'");
    seen.push_back(key);
    if (value.empty() && !it->allow_empty) throw ConfigError(where + "key '" + key + "' has an empty value");
    try {
      it->set(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

/// Effective configuration, one `key=value` per line in schema order.
inline std::vector<std::string> config_lines(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& e : detail::schema()) out.push_back(e.key + "=" + e.get(cfg));
  return out;
}

inline std::string config_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& l : config_lines(cfg)) s += l + "\n";
  return s;
}

}  // namespace sqglab::io
