#pragma once

// Flat `key = value` experiment files. Keys are the CLI flag names without
// dashes; '#' starts a comment; a repeated key keeps its last value.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinpath/clt.hpp"
#include "spinpath/csv.hpp"
#include "spinpath/errors.hpp"

namespace spinpath {

/// Values present in a config file. Absent keys stay empty so that callers
/// can layer flags over file over defaults.
struct ConfigOverrides {
  std::optional<int> n;
  std::optional<double> beta;
  std::optional<double> h;
  std::optional<double> alpha;
  std::optional<double> u_scale;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::vector<std::string> warnings;

  /// Writes every present value into `cfg`.
  void apply_to(ExperimentConfig& cfg) const {
    if (n) cfg.n = *n;
    if (beta) cfg.beta = *beta;
    if (h) cfg.h = *h;
    if (alpha) cfg.alpha = *alpha;
    if (u_scale) cfg.u_scale = *u_scale;
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = *seed;
    if (steps) cfg.steps = *steps;
    if (threads) cfg.threads = *threads;
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"n",    "beta", "h",     "alpha",   "u-scale", "samples",
                                             "seed", "steps", "threads", "out-dir"};
  return keys;
}

namespace detail {

inline int parse_int(std::string_view v, const std::string& key) {
  try {
    const long long x = csv::to_int(v);
    require(x >= std::numeric_limits<int>::min() && x <= std::numeric_limits<int>::max(), "value out of range", key);
    return static_cast<int>(x);
  } catch (const ValidationError&) {
    throw ValidationError("invalid integer for '" + key + "': '" + std::string(v) + "'", key);
  }
}

inline double parse_double(std::string_view v, const std::string& key) {
  try {
    return csv::to_double(v);
  } catch (const ValidationError&) {
    throw ValidationError("invalid number for '" + key + "': '" + std::string(v) + "'", key);
  }
}

inline std::uint64_t parse_seed(std::string_view v, const std::string& key) {
  v = csv::trim(v);
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
    throw ValidationError("invalid seed for '" + key + "': '" + std::string(v) + "'", key);
  return x;
}

}  // namespace detail

inline ConfigOverrides parse_config(std::istream& is) {
  ConfigOverrides c;
  std::vector<std::string> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, "config line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key(csv::trim(line.substr(0, eq)));
    const std::string_view value = csv::trim(line.substr(eq + 1));
    require(!value.empty(), "config key '" + key + "' has no value", key);

    bool known = false;
    for (const auto& k : config_keys()) known = known || k == key;
    require(known, "unknown config key '" + key + "'", key);
    for (const auto& s : seen)
      if (s == key) c.warnings.push_back("config key '" + key + "' repeated; the last value wins");
    seen.push_back(key);

    if (key == "n") c.n = detail::parse_int(value, key);
    else if (key == "beta") c.beta = detail::parse_double(value, key);
    else if (key == "h") c.h = detail::parse_double(value, key);
    else if (key == "alpha") c.alpha = detail::parse_double(value, key);
    else if (key == "u-scale") c.u_scale = detail::parse_double(value, key);
    else if (key == "samples") c.samples = detail::parse_int(value, key);
    else if (key == "seed") c.seed = detail::parse_seed(value, key);
    else if (key == "steps") c.steps = detail::parse_int(value, key);
    else if (key == "threads") c.threads = detail::parse_int(value, key);
    else c.out_dir = std::string(value);
  }
  return c;
}

/// Reads and parses a config file.
inline ConfigOverrides read_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open config file '" + path + "'", "config");
  return parse_config(is);
}

struct LoadedConfig {
  ExperimentConfig config;
  std::optional<std::string> out_dir;
  std::vector<std::string> warnings;
};

/// File values over `defaults`, validated.
inline LoadedConfig load_config(const std::string& path, const ExperimentConfig& defaults = {}) {
  const ConfigOverrides o = read_config(path);
  LoadedConfig out{defaults, o.out_dir, o.warnings};
  o.apply_to(out.config);
  out.config.validate();
  return out;
}

}  // namespace spinpath
