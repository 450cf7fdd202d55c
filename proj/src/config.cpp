// SPDX-License-Identifier: Apache-2.0
#include "tamedch/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "tamedch/errors.hpp"
#include "tamedch/serialize.hpp"

namespace tamedch {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(fmt::format("empty entry in list '{}'", s));
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, value));
  }
  if (used != value.size()) throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, value));
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') throw ConfigError(fmt::format("{}: expected an unsigned integer", key));
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected an unsigned integer, got '{}'", key, value));
  }
  if (used != value.size()) throw ConfigError(fmt::format("{}: expected an unsigned integer, got '{}'", key, value));
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, value));
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: expected a finite number, got '{}'", key, value));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, value));
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

template <typename T>
std::string join_ints(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

double parse_step_size(const std::string& text) {
  const std::string t = trim(text);
  if (t.rfind("2^", 0) == 0) {
    const long long e = parse_integer("step size exponent", t.substr(2));
    return std::ldexp(1.0, static_cast<int>(e));
  }
  return parse_real("step size", t);
}

long steps_for(double T, double tau) {
  if (!(tau > 0.0)) throw ConfigError(fmt::format("step size must be > 0, got {}", tau));
  const double ratio = T / tau;
  const auto M = static_cast<long>(std::llround(ratio));
  if (M < 1 || std::abs(static_cast<double>(M) * tau - T) > 1e-12 * T) {
    throw ConfigError(fmt::format("T = {} is not an integer multiple of tau = {}", T, tau));
  }
  return M;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"dim", [&](auto& k, auto& v) { cfg.dim = static_cast<int>(parse_integer(k, v)); }},
      {"N", [&](auto& k, auto& v) { cfg.N = static_cast<int>(parse_integer(k, v)); }},
      {"n_grid", [&](auto& k, auto& v) { cfg.n_grid = static_cast<int>(parse_integer(k, v)); }},
      {"T", [&](auto& k, auto& v) { cfg.T = parse_real(k, v); }},
      {"noise.kind", [&](auto&, auto& v) { cfg.noise_kind = v; }},
      {"noise.seed", [&](auto& k, auto& v) { cfg.seed = parse_unsigned(k, v); }},
      {"scheme", [&](auto&, auto& v) { cfg.scheme = v; }},
      {"tau.list",
       [&](auto&, auto& v) {
         cfg.tau_list.clear();
         for (const auto& item : split_list(v)) cfg.tau_list.push_back(parse_step_size(item));
       }},
      {"tau.ref", [&](auto&, auto& v) { cfg.tau_ref = parse_step_size(v); }},
      {"samples", [&](auto& k, auto& v) { cfg.samples = static_cast<int>(parse_integer(k, v)); }},
      {"ic.preset", [&](auto&, auto& v) { cfg.ic_preset = v; }},
      {"out.dir", [&](auto&, auto& v) { cfg.out_dir = v; }},
      {"mode",
       [&](auto& k, auto& v) {
         if (v == "temporal") {
           cfg.mode = ConvergenceMode::Temporal;
         } else if (v == "spatial") {
           cfg.mode = ConvergenceMode::Spatial;
         } else {
           throw ConfigError(fmt::format("{}: expected temporal or spatial, got '{}'", k, v));
         }
       }},
      {"N.list",
       [&](auto& k, auto& v) {
         cfg.N_list.clear();
         for (const auto& item : split_list(v)) cfg.N_list.push_back(static_cast<int>(parse_integer(k, item)));
       }},
      {"M.list",
       [&](auto& k, auto& v) {
         cfg.M_list.clear();
         for (const auto& item : split_list(v)) cfg.M_list.push_back(static_cast<long>(parse_integer(k, item)));
       }},
      {"nonlinearity", [&](auto&, auto& v) { cfg.nonlinearity = v; }},
      {"timing", [&](auto& k, auto& v) { cfg.timing = parse_bool(k, v); }},
      {"newton.tol", [&](auto& k, auto& v) { cfg.newton_tol = parse_real(k, v); }},
      {"newton.max_iter", [&](auto& k, auto& v) { cfg.newton_max_iter = static_cast<int>(parse_integer(k, v)); }},
  };

  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(fmt::format("line {}: unknown key '{}'", lineno, key));
    if (!seen.insert(key).second) throw ConfigError(fmt::format("line {}: duplicate key '{}'", lineno, key));
    if (value.empty()) throw ConfigError(fmt::format("line {}: empty value for '{}'", lineno, key));
    it->second(key, value);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> kv{
      {"dim", std::to_string(dim)},
      {"N", std::to_string(N)},
      {"n_grid", std::to_string(n_grid)},
      {"T", format_double(T)},
      {"noise.kind", noise_kind},
      {"noise.seed", std::to_string(seed)},
      {"scheme", scheme},
      {"tau.list", join_reals(tau_list)},
      {"tau.ref", format_double(tau_ref)},
      {"samples", std::to_string(samples)},
      {"ic.preset", ic_preset},
      {"mode", mode == ConvergenceMode::Temporal ? "temporal" : "spatial"},
      {"N.list", join_ints(N_list)},
      {"M.list", join_ints(M_list)},
      {"nonlinearity", nonlinearity},
      {"timing", timing ? "true" : "false"},
      {"newton.tol", format_double(newton_tol)},
      {"newton.max_iter", std::to_string(newton_max_iter)},
  };
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

ExperimentPlan make_plan(const RunConfig& cfg, unsigned workers) {
  try {
    ExperimentPlan plan;
    plan.basis = BasisSpec(cfg.dim, cfg.N);
    if (cfg.noise_kind == "none") {
      plan.noise_kind = NoiseKind::Custom;
    } else {
      plan.noise_kind = noise_kind_from_string(cfg.noise_kind);
    }
    if (cfg.dim >= 2 && plan.noise_kind == NoiseKind::White) {
      throw ConfigError("white noise requires dim = 1 (the regularity condition fails for d >= 2)");
    }
    plan.noise();  // rejects kinds unsupported for the dimension
    plan.ic = initial_condition_from_string(cfg.ic_preset);
    plan.schemes = {scheme_from_string(cfg.scheme)};
    if (cfg.nonlinearity == "cubic") {
      plan.drift = Drift::Cubic;
    } else if (cfg.nonlinearity == "none") {
      plan.drift = Drift::None;
    } else {
      throw ConfigError(fmt::format("nonlinearity: expected cubic or none, got '{}'", cfg.nonlinearity));
    }
    plan.T = cfg.T;
    if (!(cfg.T > 0.0)) throw ConfigError("T must be > 0");
    for (double tau : cfg.tau_list) plan.steps.push_back(steps_for(cfg.T, tau));
    plan.reference_steps = steps_for(cfg.T, cfg.tau_ref);
    plan.N_list = cfg.N_list;
    if (cfg.samples < 1) throw ConfigError("samples must be >= 1");
    plan.samples = cfg.samples;
    plan.seed = cfg.seed;
    if (cfg.n_grid < 0) throw ConfigError("n_grid must be >= 0");
    plan.n_grid = cfg.n_grid;
    plan.newton_tol = cfg.newton_tol;
    plan.newton_max_iter = cfg.newton_max_iter;
    plan.workers = std::max(1u, workers);
    if (cfg.n_grid != 0 && cfg.n_grid < plan.basis.N() + 1) {
      throw ConfigError(fmt::format("n_grid {} < N + 1", cfg.n_grid));
    }
    if (plan.drift == Drift::Cubic && cfg.n_grid != 0 && cfg.n_grid < plan.basis.min_cubic_grid()) {
      throw ConfigError(fmt::format("n_grid {} below the cubic dealiasing bound {}", cfg.n_grid,
                                    plan.basis.min_cubic_grid()));
    }
    plan.scheme_config(plan.schemes.front(), plan.steps.front()).validate();
    return plan;
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const IndexError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace tamedch
