#pragma once

// Run/sweep configuration: flat `key = value` text with `#` comments, plus
// seeded initial conditions.
//
// Random initial opinions come from std::mt19937_64 (the 64-bit Mersenne Twister
// MT19937-64, fully specified by the C++ standard) seeded with the configured
// seed. A draw u is mapped to [0,1) as (u >> 11) * 2^-53. Opinions are drawn
// first (agents 1..n in order); independent actions, if requested, follow.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coevo/model.hpp"
#include "coevo/simulation.hpp"

namespace coevo {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& msg)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class InitMode { UniformYEqualsX, UniformIndependent, Explicit };

inline const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::UniformYEqualsX: return "uniform_y_equals_x";
    case InitMode::UniformIndependent: return "uniform_independent";
    case InitMode::Explicit: return "explicit";
  }
  return "uniform_y_equals_x";
}

struct OutputFlags {
  bool trajectory_csv = true;
  bool matrices_csv = false;
  bool graphs_dot = true;
  bool report_json = true;
};

struct RunConfig {
  ModelParams params{10, 0.3, 0.5};
  std::uint64_t seed = 1;
  std::size_t horizon = kDefaultHorizon;
  Tolerances tolerances;
  InitMode init_mode = InitMode::UniformYEqualsX;
  std::vector<double> x0;
  std::vector<double> y0;
  OutputFlags outputs;
};

struct SweepConfig {
  std::vector<double> epsilon_grid;
  std::vector<double> phi_grid;
  std::vector<std::uint64_t> seeds;
  RunConfig base;
};

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline PopulationState initial_state(const RunConfig& cfg) {
  const std::size_t n = cfg.params.n;
  PopulationState s;
  if (cfg.init_mode == InitMode::Explicit) {
    s.x = cfg.x0;
    s.y = cfg.y0.empty() ? cfg.x0 : cfg.y0;
    return s;
  }
  std::mt19937_64 gen(cfg.seed);
  s.x.resize(n);
  for (double& v : s.x) v = uniform01(gen);
  if (cfg.init_mode == InitMode::UniformYEqualsX) {
    s.y = s.x;
  } else {
    s.y.resize(n);
    for (double& v : s.y) v = uniform01(gen);
  }
  return s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::size_t line, std::string_view key) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ConfigError(line, "invalid value '" + std::string(s) + "' for " + std::string(key));
  return value;
}

inline double parse_unit(std::string_view s, std::size_t line, std::string_view key) {
  const double v = parse_number<double>(s, line, key);
  if (!(v >= 0.0 && v <= 1.0))
    throw ConfigError(line, std::string(key) + " must lie in [0,1], got " + std::string(s));
  return v;
}

inline std::vector<double> parse_unit_list(std::string_view s, std::size_t line,
                                           std::string_view key) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(parse_unit(item, line, key));
  return out;
}

// Comma list of integers; `a..b` expands to the inclusive range.
inline std::vector<std::uint64_t> parse_seed_list(std::string_view s, std::size_t line) {
  std::vector<std::uint64_t> out;
  for (auto item : split_list(s)) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(parse_number<std::uint64_t>(item, line, "seeds"));
      continue;
    }
    const auto lo = parse_number<std::uint64_t>(trim(item.substr(0, dots)), line, "seeds");
    const auto hi = parse_number<std::uint64_t>(trim(item.substr(dots + 2)), line, "seeds");
    if (hi < lo) throw ConfigError(line, "seed range " + std::string(item) + " is empty");
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

inline bool parse_bool(std::string_view s, std::size_t line, std::string_view key) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(line, "invalid boolean '" + std::string(s) + "' for " + std::string(key));
}

struct Entry {
  std::size_t line;
  std::string key;
  std::string value;
};

inline std::vector<Entry> read_entries(std::istream& in) {
  std::vector<Entry> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line, "expected 'key = value'");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key");
    if (value.empty()) throw ConfigError(line, "missing value for " + std::string(key));
    for (const auto& e : out)
      if (e.key == key) throw ConfigError(line, "duplicate key " + std::string(key));
    out.push_back({line, std::string(key), std::string(value)});
  }
  return out;
}

// Applies a run-level key; returns false when the key is not a run key.
inline bool apply_run_key(RunConfig& c, const Entry& e, std::size_t& init_line) {
  const std::string_view v = e.value;
  const std::size_t ln = e.line;
  if (e.key == "n") {
    c.params.n = parse_number<std::size_t>(v, ln, e.key);
    if (c.params.n < 1) throw ConfigError(ln, "n must be >= 1");
  } else if (e.key == "epsilon") {
    c.params.epsilon = parse_unit(v, ln, e.key);
  } else if (e.key == "phi") {
    c.params.phi = parse_unit(v, ln, e.key);
  } else if (e.key == "seed") {
    c.seed = parse_number<std::uint64_t>(v, ln, e.key);
  } else if (e.key == "horizon") {
    c.horizon = parse_number<std::size_t>(v, ln, e.key);
    if (c.horizon < 2) throw ConfigError(ln, "horizon must be >= 2");
  } else if (e.key == "consensus_tolerance") {
    c.tolerances.consensus = parse_number<double>(v, ln, e.key);
    if (!(c.tolerances.consensus > 0.0)) throw ConfigError(ln, "consensus_tolerance must be > 0");
  } else if (e.key == "containment_tolerance") {
    c.tolerances.containment = parse_number<double>(v, ln, e.key);
    if (!(c.tolerances.containment > 0.0))
      throw ConfigError(ln, "containment_tolerance must be > 0");
  } else if (e.key == "window") {
    c.tolerances.window = parse_number<std::size_t>(v, ln, e.key);
    if (c.tolerances.window < 1) throw ConfigError(ln, "window must be >= 1");
  } else if (e.key == "init_mode") {
    init_line = ln;
    if (v == "uniform_y_equals_x") c.init_mode = InitMode::UniformYEqualsX;
    else if (v == "uniform_independent") c.init_mode = InitMode::UniformIndependent;
    else if (v == "explicit") c.init_mode = InitMode::Explicit;
    else throw ConfigError(ln, "unknown init_mode '" + std::string(v) + "'");
  } else if (e.key == "x0") {
    c.x0 = parse_unit_list(v, ln, e.key);
  } else if (e.key == "y0") {
    c.y0 = parse_unit_list(v, ln, e.key);
  } else if (e.key == "trajectory_csv") {
    c.outputs.trajectory_csv = parse_bool(v, ln, e.key);
  } else if (e.key == "matrices_csv") {
    c.outputs.matrices_csv = parse_bool(v, ln, e.key);
  } else if (e.key == "graphs_dot") {
    c.outputs.graphs_dot = parse_bool(v, ln, e.key);
  } else if (e.key == "report_json") {
    c.outputs.report_json = parse_bool(v, ln, e.key);
  } else {
    return false;
  }
  return true;
}

inline void check_explicit(RunConfig& c, const std::vector<Entry>& entries, std::size_t init_line) {
  auto line_of = [&](std::string_view key) {
    for (const auto& e : entries)
      if (e.key == key) return e.line;
    return init_line;
  };
  if (c.init_mode != InitMode::Explicit) {
    if (!c.x0.empty() || !c.y0.empty())
      throw ConfigError(line_of(c.x0.empty() ? "y0" : "x0"),
                        "x0/y0 are only valid with init_mode = explicit");
    return;
  }
  if (c.x0.empty()) throw ConfigError(init_line, "init_mode = explicit requires x0");
  if (c.x0.size() != c.params.n)
    throw ConfigError(line_of("x0"), "x0 has " + std::to_string(c.x0.size()) +
                                         " entries, expected n = " + std::to_string(c.params.n));
  if (!c.y0.empty() && c.y0.size() != c.params.n)
    throw ConfigError(line_of("y0"), "y0 has " + std::to_string(c.y0.size()) +
                                         " entries, expected n = " + std::to_string(c.params.n));
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
  const auto entries = detail::read_entries(in);
  RunConfig c;
  std::size_t init_line = 0;
  for (const auto& e : entries)
    if (!detail::apply_run_key(c, e, init_line))
      throw ConfigError(e.line, "unknown key '" + e.key + "'");
  detail::check_explicit(c, entries, init_line);
  return c;
}

inline RunConfig parse_run_config(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

inline SweepConfig parse_sweep_config(std::istream& in) {
  const auto entries = detail::read_entries(in);
  SweepConfig s;
  std::size_t init_line = 0;
  std::size_t seeds_line = 0;
  for (const auto& e : entries) {
    if (e.key == "epsilon_grid") {
      s.epsilon_grid = detail::parse_unit_list(e.value, e.line, e.key);
    } else if (e.key == "phi_grid") {
      s.phi_grid = detail::parse_unit_list(e.value, e.line, e.key);
    } else if (e.key == "seeds") {
      s.seeds = detail::parse_seed_list(e.value, e.line);
      seeds_line = e.line;
    } else if (!detail::apply_run_key(s.base, e, init_line)) {
      throw ConfigError(e.line, "unknown key '" + e.key + "'");
    }
  }
  detail::check_explicit(s.base, entries, init_line);
  if (s.epsilon_grid.empty()) s.epsilon_grid = {s.base.params.epsilon};
  if (s.phi_grid.empty()) s.phi_grid = {s.base.params.phi};
  if (s.seeds.empty()) {
    if (seeds_line) throw ConfigError(seeds_line, "seeds list is empty");
    s.seeds = {s.base.seed};
  }
  return s;
}

inline SweepConfig parse_sweep_config(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep_config(in);
}

}  // namespace coevo
