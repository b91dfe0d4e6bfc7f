#pragma once

// JSON (de)serialization for the algorithm configs. Field names mirror the
// struct members one-to-one; unknown keys are rejected so that typos in config
// files fail fast instead of silently falling back to defaults.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "raf/init.hpp"
#include "raf/solver.hpp"

namespace raf {

inline void check_known_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                             const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) { known = true; break; }
    if (!known) throw std::invalid_argument("unknown key '" + it.key() + "' in " + context);
  }
}

inline nlohmann::json to_json(const InitConfig& c) {
  return {{"subset_fraction", c.subset_fraction},
          {"gamma", c.gamma},
          {"power_iters", c.power_iters},
          {"eig_tol", c.eig_tol},
          {"power_seed", c.power_seed}};
}

inline InitConfig init_config_from_json(const nlohmann::json& j) {
  check_known_keys(j, {"subset_fraction", "gamma", "power_iters", "eig_tol", "power_seed"},
                   "init config");
  InitConfig c;
  if (j.contains("subset_fraction")) c.subset_fraction = j["subset_fraction"].get<double>();
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("power_iters")) c.power_iters = j["power_iters"].get<int>();
  if (j.contains("eig_tol")) c.eig_tol = j["eig_tol"].get<double>();
  if (j.contains("power_seed")) c.power_seed = j["power_seed"].get<std::uint64_t>();
  if (c.subset_fraction <= 0.0 || c.subset_fraction > 1.0)
    throw std::invalid_argument("subset_fraction must be in (0, 1]");
  if (c.gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (c.power_iters < 1) throw std::invalid_argument("power_iters must be >= 1");
  return c;
}

inline const char* to_string(WeightScheme::Kind k) {
  switch (k) {
    case WeightScheme::Kind::Raf: return "raf";
    case WeightScheme::Kind::Constant: return "constant";
    case WeightScheme::Kind::HardTruncation: return "hard-truncation";
  }
  return "?";
}

inline WeightScheme::Kind weight_scheme_kind_from_string(const std::string& s) {
  if (s == "raf") return WeightScheme::Kind::Raf;
  if (s == "constant") return WeightScheme::Kind::Constant;
  if (s == "hard-truncation") return WeightScheme::Kind::HardTruncation;
  throw std::invalid_argument("unknown weight scheme '" + s + "'");
}

inline nlohmann::json to_json(const WeightScheme& s) {
  return {{"kind", to_string(s.kind)}, {"beta", s.beta}, {"alpha", s.alpha}};
}

inline WeightScheme weight_scheme_from_json(const nlohmann::json& j) {
  check_known_keys(j, {"kind", "beta", "alpha"}, "weight scheme");
  WeightScheme s;
  if (j.contains("kind")) s.kind = weight_scheme_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("beta")) s.beta = j["beta"].get<double>();
  if (j.contains("alpha")) s.alpha = j["alpha"].get<double>();
  if (s.kind == WeightScheme::Kind::Raf && s.beta <= 0.0)
    throw std::invalid_argument("raf scheme requires beta > 0");
  if (s.kind == WeightScheme::Kind::HardTruncation && s.alpha <= 0.0)
    throw std::invalid_argument("hard-truncation scheme requires alpha > 0");
  return s;
}

inline nlohmann::json to_json(const SolverConfig& c) {
  return {{"step_size", c.step_size},
          {"weight_scheme", to_json(c.scheme)},
          {"max_iters", c.max_iters},
          {"stop_tol", c.stop_tol},
          {"trace_distance", c.trace_distance}};
}

inline SolverConfig solver_config_from_json(const nlohmann::json& j, ModelKind kind) {
  check_known_keys(j, {"step_size", "weight_scheme", "max_iters", "stop_tol", "trace_distance"},
                   "solver config");
  SolverConfig c = SolverConfig::for_model(kind);
  if (j.contains("step_size")) c.step_size = j["step_size"].get<double>();
  if (j.contains("weight_scheme")) c.scheme = weight_scheme_from_json(j["weight_scheme"]);
  if (j.contains("max_iters")) c.max_iters = j["max_iters"].get<int>();
  if (j.contains("stop_tol")) c.stop_tol = j["stop_tol"].get<double>();
  if (j.contains("trace_distance")) c.trace_distance = j["trace_distance"].get<bool>();
  if (c.step_size <= 0.0) throw std::invalid_argument("step_size must be > 0");
  if (c.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (c.stop_tol < 0.0) throw std::invalid_argument("stop_tol must be >= 0");
  return c;
}

}  // namespace raf
