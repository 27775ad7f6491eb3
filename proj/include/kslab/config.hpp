#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kslab/initdata.hpp"
#include "kslab/motility.hpp"
#include "kslab/solver.hpp"

namespace kslab {

/// Parse or validation failure; `line`/`col` are 1-based and refer to the
/// config text (0 when the error is semantic rather than syntactic).
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& what, int line = 0, int col = 0)
      : std::runtime_error(what), line(line), col(col) {}
  int line, col;
};

struct ModelBlock {
  std::string kind = "prototype";  // prototype | prototype-log | custom
  int n = 2;
  double R = 1.0;
  double m = 1.0;
  double q = 1.0;
  std::optional<double> s0;
  bool certify = false;
};

struct InitBlock {
  double mass = 1.0;
  std::optional<double> eta;  // default: eta0/4
  int halvings = 8;           // eta sweep depth
  InitDataOverrides overrides;
};

struct GridBlock {
  std::size_t cells = 1024;
  // grading: 0 = auto (resolve eta), 1 = uniform, > 1 = explicit ratio
  double grading = 0.0;
  double resolve_factor = 8.0;
};

struct SolverBlock {
  double cfl_safety = 0.9;
  double dt_min = 1e-13;
  double u_blowup_threshold = 1e8;
  double t_end = 1.0;
  double chemotaxis_switch = 1.0;
  long clip_budget = 1000000;
  std::optional<double> monitor_alpha;  // default: initial-data alpha
  std::optional<double> monitor_kappa;  // default: (n-p)/p
};

struct OutputBlock {
  std::string dir = "out";
  std::size_t trace_stride = 16;
  std::size_t snapshot_stride = 0;
};

struct ExperimentConfig {
  ModelBlock model;
  InitBlock initdata;
  GridBlock grid;
  SolverBlock solver;
  OutputBlock outputs;

  MotilityModel make_model() const {
    if (model.kind == "prototype")
      return model.s0 ? MotilityModel::prototype(model.n, model.R, model.m,
                                                 model.q, *model.s0)
                      : MotilityModel::prototype(model.n, model.R, model.m,
                                                 model.q);
    if (model.kind == "prototype-log") {
      if (model.n != 2)
        throw ConfigError("model.kind prototype-log requires n = 2");
      return model.s0 ? MotilityModel::prototype_log(model.R, model.m, *model.s0)
                      : MotilityModel::prototype_log(model.R, model.m);
    }
    if (model.kind == "custom")
      throw ConfigError(
          "model.kind custom: evaluator pairs are constructed through the "
          "library API, not from config files");
    throw ConfigError("unknown model.kind '" + model.kind + "'");
  }
};

namespace detail {

inline std::pair<int, int> byte_to_line_col(const std::string& text,
                                            std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const auto& a : allowed)
      if (key == a) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void fetch(const nlohmann::json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

template <class T>
void fetch(const nlohmann::json& obj, const char* key, std::optional<T>& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

}  // namespace detail

/// Strict parser for the experiment config: unknown keys are errors, every
/// numeric constraint of the underlying types is re-validated here.
inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::byte_to_line_col(text, e.byte);
    throw ConfigError("config parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what(),
                      line, col);
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown_keys(
      root, {"model", "initdata", "grid", "solver", "outputs"}, "config");

  ExperimentConfig cfg;
  try {
    if (root.contains("model")) {
      const auto& m = root.at("model");
      detail::reject_unknown_keys(
          m, {"kind", "n", "R", "m", "q", "q1", "q2", "s0", "certify"}, "model");
      detail::fetch(m, "kind", cfg.model.kind);
      detail::fetch(m, "n", cfg.model.n);
      detail::fetch(m, "R", cfg.model.R);
      detail::fetch(m, "m", cfg.model.m);
      detail::fetch(m, "certify", cfg.model.certify);
      detail::fetch(m, "s0", cfg.model.s0);
      if (m.contains("q") && (m.contains("q1") || m.contains("q2")))
        throw ConfigError("model: give either q or the pair q1/q2, not both");
      if (m.contains("q1") || m.contains("q2")) {
        double q1 = 0.0, q2 = 0.0;
        detail::fetch(m, "q1", q1);
        detail::fetch(m, "q2", q2);
        if (q1 > q2)
          throw ConfigError(
              "model: sensitivity exponents must be ordered q1 <= q2 (the "
              "comparison sandwich requires it)");
        if (q1 != q2)
          throw ConfigError(
              "model: the prototype family has a single sensitivity exponent; "
              "q1 < q2 arises only for custom pairs");
        cfg.model.q = q1;
      } else {
        detail::fetch(m, "q", cfg.model.q);
      }
      if (cfg.model.kind == "prototype-log" && m.contains("q") &&
          cfg.model.q != cfg.model.m)
        throw ConfigError("model: prototype-log requires q = m");
      if (cfg.model.kind == "prototype-log" && !m.contains("q"))
        cfg.model.q = cfg.model.m;
    }
    if (root.contains("initdata")) {
      const auto& b = root.at("initdata");
      detail::reject_unknown_keys(
          b, {"mass", "eta", "halvings", "alpha", "beta", "p", "gamma", "delta"},
          "initdata");
      detail::fetch(b, "mass", cfg.initdata.mass);
      detail::fetch(b, "eta", cfg.initdata.eta);
      detail::fetch(b, "halvings", cfg.initdata.halvings);
      detail::fetch(b, "alpha", cfg.initdata.overrides.alpha);
      detail::fetch(b, "beta", cfg.initdata.overrides.beta);
      detail::fetch(b, "p", cfg.initdata.overrides.p);
      detail::fetch(b, "gamma", cfg.initdata.overrides.gamma);
      detail::fetch(b, "delta", cfg.initdata.overrides.delta);
    }
    if (root.contains("grid")) {
      const auto& b = root.at("grid");
      detail::reject_unknown_keys(b, {"cells", "grading", "resolve_factor"},
                                  "grid");
      detail::fetch(b, "cells", cfg.grid.cells);
      if (b.contains("grading")) {
        const auto& g = b.at("grading");
        if (g.is_string()) {
          const std::string s = g.get<std::string>();
          if (s == "auto")
            cfg.grid.grading = 0.0;
          else if (s == "uniform")
            cfg.grid.grading = 1.0;
          else
            throw ConfigError("grid.grading must be 'auto', 'uniform' or a ratio");
        } else {
          cfg.grid.grading = g.get<double>();
          if (!(cfg.grid.grading >= 1.0))
            throw ConfigError("grid.grading ratio must be >= 1");
        }
      }
      detail::fetch(b, "resolve_factor", cfg.grid.resolve_factor);
      if (!(cfg.grid.resolve_factor > 0.0))
        throw ConfigError("grid.resolve_factor must be > 0");
    }
    if (root.contains("solver")) {
      const auto& b = root.at("solver");
      detail::reject_unknown_keys(
          b,
          {"cfl_safety", "dt_min", "u_blowup_threshold", "t_end",
           "chemotaxis_switch", "clip_budget", "monitor_alpha", "monitor_kappa"},
          "solver");
      detail::fetch(b, "cfl_safety", cfg.solver.cfl_safety);
      detail::fetch(b, "dt_min", cfg.solver.dt_min);
      detail::fetch(b, "u_blowup_threshold", cfg.solver.u_blowup_threshold);
      detail::fetch(b, "t_end", cfg.solver.t_end);
      detail::fetch(b, "chemotaxis_switch", cfg.solver.chemotaxis_switch);
      detail::fetch(b, "clip_budget", cfg.solver.clip_budget);
      detail::fetch(b, "monitor_alpha", cfg.solver.monitor_alpha);
      detail::fetch(b, "monitor_kappa", cfg.solver.monitor_kappa);
    }
    if (root.contains("outputs")) {
      const auto& b = root.at("outputs");
      detail::reject_unknown_keys(b, {"dir", "trace_stride", "snapshot_stride"},
                                  "outputs");
      detail::fetch(b, "dir", cfg.outputs.dir);
      detail::fetch(b, "trace_stride", cfg.outputs.trace_stride);
      detail::fetch(b, "snapshot_stride", cfg.outputs.snapshot_stride);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }

  // fail fast on invariants of the underlying types
  cfg.make_model();
  if (!(cfg.initdata.mass > 0.0))
    throw ConfigError("initdata.mass must be > 0");
  if (cfg.initdata.halvings < 1 || cfg.initdata.halvings > 40)
    throw ConfigError("initdata.halvings must lie in [1, 40]");
  const double eta0 = std::min(1.0, cfg.model.R / 2.0);
  if (cfg.initdata.eta && !(*cfg.initdata.eta > 0.0 && *cfg.initdata.eta < eta0))
    throw ConfigError("initdata.eta must lie in (0, min{1, R/2})");
  if (cfg.grid.cells < 2) throw ConfigError("grid.cells must be >= 2");
  SolverConfig probe;
  probe.cfl_safety = cfg.solver.cfl_safety;
  probe.dt_min = cfg.solver.dt_min;
  probe.u_blowup_threshold = cfg.solver.u_blowup_threshold;
  probe.t_end = cfg.solver.t_end;
  probe.chemotaxis_switch = cfg.solver.chemotaxis_switch;
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver block: ") + e.what());
  }
  return cfg;
}

}  // namespace kslab
