#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "paac/agents.hpp"
#include "paac/bench.hpp"
#include "paac/common.hpp"
#include "paac/envs.hpp"
#include "paac/textio.hpp"

namespace paac {

// Flat key=value run configuration. Section headers ([experiment], [agent],
// [env], [schedule]) are allowed for grouping but keys are global; unknown
// keys are rejected by name.
struct RunConfig {
  // experiment
  std::string env_name = "lqr1d";
  std::vector<Variant> variants{Variant::ddpg};
  std::size_t n_trials = 10;
  std::uint64_t trial_seed_base = 0;
  std::uint64_t eval_seed_base = 100;
  std::size_t n_eval_seeds = 10;
  std::size_t total_steps = 20000;
  std::size_t eval_period = 5000;
  std::string output_dir = "out";
  std::size_t jobs = 1;
  double success_threshold = std::numeric_limits<double>::quiet_NaN();
  std::size_t episode_len = 0;  // 0 keeps the preset value
  // agent
  double gamma = 0.99;
  std::size_t minibatch_n = 256;
  std::size_t buffer_capacity = 200000;
  std::size_t hidden_width = 256;
  double lr = 1e-3;
  double noise_scale = 0.1;
  std::size_t warmup_steps = 8000;
  bool warmup_steps_set = false;  // unset -> per-preset default
  std::size_t updates_per_step = 1;
  PhaseKind schedule_kind = PhaseKind::linear;
  TdForm td_form = TdForm::squared_delta;
  double target_tau = 0.05;
  std::size_t target_period = 15;
  std::string pinned_target_mode;  // "", "hard", "soft", "none"
  // riccati subcommand
  double riccati_tol = 1e-12;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

inline std::size_t to_count(const std::string& key, const std::string& value) {
  try {
    return static_cast<std::size_t>(parse_u64(value));
  } catch (const IoError&) {
    throw ConfigError("config key '" + key + "': expected a nonnegative integer, got '" +
                      value + "'");
  }
}

inline double to_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const IoError&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::to_count;
  using detail::to_real;
  if (key == "env") {
    env_preset(value);  // validates the name
    cfg.env_name = value;
  } else if (key == "variants") {
    cfg.variants.clear();
    for (const std::string& name : detail::split_commas(value)) {
      cfg.variants.push_back(variant_from_name(name));
    }
    if (cfg.variants.empty()) throw ConfigError("config key 'variants': empty list");
  } else if (key == "n_trials") {
    cfg.n_trials = to_count(key, value);
  } else if (key == "trial_seed_base") {
    cfg.trial_seed_base = to_count(key, value);
  } else if (key == "eval_seed_base") {
    cfg.eval_seed_base = to_count(key, value);
  } else if (key == "n_eval_seeds") {
    cfg.n_eval_seeds = to_count(key, value);
  } else if (key == "total_steps") {
    cfg.total_steps = to_count(key, value);
  } else if (key == "eval_period") {
    cfg.eval_period = to_count(key, value);
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "jobs") {
    cfg.jobs = to_count(key, value);
    if (cfg.jobs == 0) throw ConfigError("config key 'jobs': must be >= 1");
  } else if (key == "success_threshold") {
    if (value == "auto") {
      cfg.success_threshold = std::numeric_limits<double>::quiet_NaN();
    } else {
      cfg.success_threshold = to_real(key, value);
    }
  } else if (key == "episode_len") {
    cfg.episode_len = to_count(key, value);
  } else if (key == "gamma") {
    cfg.gamma = to_real(key, value);
  } else if (key == "minibatch_n") {
    cfg.minibatch_n = to_count(key, value);
  } else if (key == "buffer_capacity") {
    cfg.buffer_capacity = to_count(key, value);
  } else if (key == "hidden_width") {
    cfg.hidden_width = to_count(key, value);
  } else if (key == "lr") {
    cfg.lr = to_real(key, value);
  } else if (key == "noise_scale") {
    cfg.noise_scale = to_real(key, value);
  } else if (key == "warmup_steps") {
    cfg.warmup_steps = to_count(key, value);
    cfg.warmup_steps_set = true;
  } else if (key == "updates_per_step") {
    cfg.updates_per_step = to_count(key, value);
  } else if (key == "schedule") {
    if (value == "linear") {
      cfg.schedule_kind = PhaseKind::linear;
    } else if (value == "quadratic") {
      cfg.schedule_kind = PhaseKind::quadratic;
    } else if (value == "hard_switch") {
      cfg.schedule_kind = PhaseKind::hard_switch;
    } else {
      throw ConfigError("config key 'schedule': expected linear|quadratic|hard_switch");
    }
  } else if (key == "td_form") {
    if (value == "linear_delta") {
      cfg.td_form = TdForm::linear_delta;
    } else if (value == "squared_delta") {
      cfg.td_form = TdForm::squared_delta;
    } else {
      throw ConfigError("config key 'td_form': expected linear_delta|squared_delta");
    }
  } else if (key == "target_tau") {
    cfg.target_tau = to_real(key, value);
  } else if (key == "target_period") {
    cfg.target_period = to_count(key, value);
  } else if (key == "target_mode") {
    if (value != "hard" && value != "soft" && value != "none") {
      throw ConfigError("config key 'target_mode': expected hard|soft|none");
    }
    cfg.pinned_target_mode = value;
  } else if (key == "riccati_tol") {
    cfg.riccati_tol = to_real(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  apply_config_entry(cfg, detail::trim(assignment.substr(0, eq)),
                     detail::trim(assignment.substr(eq + 1)));
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[experiment]" && line != "[agent]" && line != "[env]" &&
          line != "[schedule]") {
        throw ConfigError("unknown config section " + line + " at line " +
                          std::to_string(lineno));
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not of the form key = value");
    }
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)),
                       detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

// Lattice check for explicitly pinned modes plus basic range validation.
inline void validate_run_config(const RunConfig& cfg) {
  if (!cfg.pinned_target_mode.empty()) {
    for (Variant v : cfg.variants) {
      const TargetUpdateKind want = variant_target_kind(v);
      const std::string name = want == TargetUpdateKind::hard   ? "hard"
                               : want == TargetUpdateKind::soft ? "soft"
                                                                : "none";
      if (cfg.pinned_target_mode != name) {
        throw ConfigError(std::string("config: variant ") + variant_name(v) +
                          " requires target_mode=" + name + " (got target_mode=" +
                          cfg.pinned_target_mode + ")");
      }
    }
  }
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("config key 'gamma': must lie in (0,1)");
  }
  if (cfg.lr <= 0.0) throw ConfigError("config key 'lr': must be positive");
  if (cfg.noise_scale < 0.0) throw ConfigError("config key 'noise_scale': must be >= 0");
  if (cfg.minibatch_n == 0) throw ConfigError("config key 'minibatch_n': must be >= 1");
  if (cfg.n_eval_seeds == 0) throw ConfigError("config key 'n_eval_seeds': must be >= 1");
  if (cfg.eval_period == 0) throw ConfigError("config key 'eval_period': must be >= 1");
  if (cfg.target_period == 0) throw ConfigError("config key 'target_period': must be >= 1");
  if (!(cfg.target_tau > 0.0 && cfg.target_tau <= 1.0)) {
    throw ConfigError("config key 'target_tau': must lie in (0,1]");
  }
}

inline EnvSpec resolve_env(const RunConfig& cfg) {
  EnvSpec env = env_preset(cfg.env_name);
  if (cfg.episode_len > 0) env.episode_len = cfg.episode_len;
  return env;
}

inline std::size_t default_warmup_for(const EnvSpec& env) {
  return env.kind == EnvKind::lqr ? 1000 : 8000;
}

inline ExperimentConfig to_experiment_config(const RunConfig& cfg) {
  validate_run_config(cfg);
  ExperimentConfig exp;
  exp.env = resolve_env(cfg);
  exp.variants = cfg.variants;
  exp.n_trials = cfg.n_trials;
  exp.trial_seed_base = cfg.trial_seed_base;
  exp.eval_seed_base = cfg.eval_seed_base;
  exp.n_eval_seeds = cfg.n_eval_seeds;
  exp.total_steps = cfg.total_steps;
  exp.eval_period = cfg.eval_period;
  exp.success_threshold = cfg.success_threshold;
  exp.jobs = cfg.jobs;
  exp.target_tau = cfg.target_tau;
  exp.target_period = cfg.target_period;
  AgentConfig& a = exp.agent_template;
  a.gamma = cfg.gamma;
  a.minibatch_n = cfg.minibatch_n;
  a.buffer_capacity = cfg.buffer_capacity;
  a.hidden_width = cfg.hidden_width;
  a.lr = cfg.lr;
  a.noise_scale = cfg.noise_scale;
  a.warmup_steps = cfg.warmup_steps_set ? cfg.warmup_steps : default_warmup_for(exp.env);
  a.updates_per_step = cfg.updates_per_step;
  a.schedule.kind = cfg.schedule_kind;
  a.actor_mode.td_form = cfg.td_form;
  return exp;
}

}  // namespace paac
