#pragma once

#include "gfstack/common.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace gfstack::experiments {

enum class Kind { D2cHeat, BoundSuite, TlpTable, StackingAudit, P0Audit, Resolvents };

inline std::string kind_name(Kind k) {
  switch (k) {
    case Kind::D2cHeat: return "d2c_heat";
    case Kind::BoundSuite: return "bound_suite";
    case Kind::TlpTable: return "tlp_table";
    case Kind::StackingAudit: return "stacking_audit";
    case Kind::P0Audit: return "p0_audit";
    case Kind::Resolvents: return "resolvents";
  }
  return "";
}

inline Kind parse_kind(const std::string& s) {
  for (Kind k : {Kind::D2cHeat, Kind::BoundSuite, Kind::TlpTable, Kind::StackingAudit, Kind::P0Audit,
                 Kind::Resolvents})
    if (kind_name(k) == s) return k;
  throw InputError("config: unknown kind '" + s + "'");
}

struct ExperimentConfig {
  Kind kind = Kind::BoundSuite;
  std::vector<int> sizes;
  double T = 1.0;
  int time_grid = 10;
  double p = 2.0;
  double q = 4.0;
  double tolerance = 1e-6;
  std::uint64_t seed = 20240601;
  std::string output;
  std::string initial = "cos";  // d2c initial datum: cos(pi x) or sin(pi x)
  int samples = 100;

  void validate() const {
    if (sizes.empty()) throw InputError("config: sizes must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < 1) throw InputError("config: sizes must be positive");
      if (i > 0 && sizes[i] <= sizes[i - 1]) throw InputError("config: sizes must be strictly increasing");
    }
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("config: T must be positive");
    if (time_grid < 1) throw InputError("config: time_grid must be at least 1");
    if (!(p >= 1.0)) throw InputError("config: p must be >= 1");
    if (!(q > std::max(2.0, p))) throw InputError("config: q must exceed max(2, p)");
    if (!(tolerance > 0.0)) throw InputError("config: tolerance must be positive");
    if (initial != "cos" && initial != "sin") throw InputError("config: initial must be cos or sin");
    if (samples < 1) throw InputError("config: samples must be positive");
  }

  std::vector<double> times() const {
    std::vector<double> t;
    for (int k = 0; k <= time_grid; ++k) t.push_back(T * k / time_grid);
    return t;
  }
};

inline ExperimentConfig default_config(Kind k) {
  ExperimentConfig c;
  c.kind = k;
  switch (k) {
    case Kind::D2cHeat:
      c.sizes = {8, 16, 32, 64};
      c.T = 0.25;
      c.time_grid = 10;
      c.tolerance = 0.05;
      break;
    case Kind::BoundSuite: c.sizes = {1}; break;
    case Kind::TlpTable: c.sizes = {2, 3, 4, 5, 6, 7}; break;
    case Kind::StackingAudit: c.sizes = {4, 8, 16, 32, 64}; break;
    case Kind::P0Audit: c.sizes = {2, 4, 8}; break;
    case Kind::Resolvents:
      c.sizes = {8, 16, 32, 64};
      c.T = 1.0;
      c.time_grid = 20;
      break;
  }
  return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (!is || !(is >> std::ws).eof()) throw InputError("config: bad value for " + key + ": '" + v + "'");
  return out;
}

}  // namespace detail

inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "kind") c.kind = parse_kind(value);
  else if (key == "sizes") {
    c.sizes.clear();
    std::string tok;
    std::istringstream is(value);
    while (std::getline(is, tok, ',')) {
      tok = detail::trim(tok);
      if (!tok.empty()) c.sizes.push_back(parse_number<int>(key, tok));
    }
  } else if (key == "T" || key == "horizon") c.T = parse_number<double>(key, value);
  else if (key == "time_grid") c.time_grid = parse_number<int>(key, value);
  else if (key == "p") c.p = parse_number<double>(key, value);
  else if (key == "q") c.q = parse_number<double>(key, value);
  else if (key == "tolerance") c.tolerance = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "output") c.output = value;
  else if (key == "initial") c.initial = value;
  else if (key == "samples") c.samples = parse_number<int>(key, value);
  else throw InputError("config: unknown key '" + key + "'");
}

// key = value per line, '#' starts a comment. Keys not given keep the defaults of `base`.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int lineno = 0;
  std::map<std::string, std::string> seen;
  std::vector<std::pair<std::string, std::string>> settings;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (seen.count(key)) throw InputError("config line " + std::to_string(lineno) + ": duplicate key " + key);
    seen[key] = value;
    settings.emplace_back(key, value);
  }
  // kind first so that the other keys override its defaults
  if (seen.count("kind")) base = default_config(parse_kind(seen["kind"]));
  for (const auto& [k, v] : settings)
    if (k != "kind") apply_setting(base, k, v);
  base.validate();
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open " + path);
  return parse_config(in, std::move(base));
}

inline const char* config_schema() {
  return "config grammar: one 'key = value' per line, '#' starts a comment\n"
         "  kind       d2c_heat | bound_suite | tlp_table | stacking_audit | p0_audit | resolvents\n"
         "  sizes      comma-separated, strictly increasing positive integers\n"
         "  T          horizon, > 0\n"
         "  time_grid  number of time steps, >= 1\n"
         "  p          transport exponent, >= 1\n"
         "  q          integrability exponent, > max(2, p) (default 4)\n"
         "  tolerance  > 0\n"
         "  seed       unsigned 64-bit integer\n"
         "  output     CSV path (stdout when empty)\n"
         "  initial    cos | sin (d2c initial datum)\n"
         "  samples    sample count for randomized checks\n"
         "csv columns: experiment,n,t,metric,lhs,rhs,slack,pass\n";
}

}  // namespace gfstack::experiments
