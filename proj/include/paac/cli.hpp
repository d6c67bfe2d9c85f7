#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "paac/bench.hpp"
#include "paac/check.hpp"
#include "paac/checkpoint.hpp"
#include "paac/config.hpp"
#include "paac/csv.hpp"
#include "paac/envs.hpp"
#include "paac/textio.hpp"

namespace paac {

// Stable process exit codes shared by every subcommand.
enum ExitCode : int {
  exit_ok = 0,
  exit_property_failure = 1,
  exit_config_error = 2,
  exit_io_error = 3,
  exit_oracle_error = 4,
};

namespace detail {

inline std::string resolved_output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("PAAC_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

inline void write_experiment_outputs(const std::string& dir, const RunConfig& cfg,
                                     const ExperimentResult& result,
                                     const std::string& suffix = "") {
  {
    auto out = open_csv(dir + "/curves" + suffix + ".csv");
    write_curves_csv(out, result, cfg.eval_seed_base);
  }
  {
    auto out = open_csv(dir + "/evalmatrix" + suffix + ".csv");
    write_evalmatrix_csv(out, result, cfg.eval_seed_base);
  }
  {
    auto out = open_csv(dir + "/metrics" + suffix + ".csv");
    write_metrics_csv(out, result);
  }
  for (const VariantResult& vr : result.variants) {
    for (std::size_t t = 0; t < vr.snapshots.size(); ++t) {
      const std::string path = dir + "/checkpoint_" + variant_name(vr.variant) +
                               "_trial" + std::to_string(t) + suffix + ".txt";
      save_agent_snapshot_file(path, vr.snapshots[t]);
    }
  }
}

}  // namespace detail

// train: full experiment, CSV emission, final checkpoints. Failed trials
// are recorded, not fatal.
inline int cmd_train(const RunConfig& cfg, std::ostream& log = std::cout) {
  const ExperimentConfig exp = to_experiment_config(cfg);
  const std::string dir = detail::resolved_output_dir(cfg);
  detail::ensure_dir(dir);
  const ExperimentResult result = run_experiment(exp);
  detail::write_experiment_outputs(dir, cfg, result);
  log << "train: wrote curves.csv evalmatrix.csv metrics.csv and " << "checkpoints to "
      << dir << "\n";
  for (const VariantResult& vr : result.variants) {
    std::size_t ok = 0;
    for (char f : vr.matrix.success_flags) ok += (f != 0) ? 1 : 0;
    log << "  " << variant_name(vr.variant) << ": " << ok << "/"
        << vr.matrix.n_trials << " successful trials";
    if (vr.metrics_defined) {
      log << ", total_cost " << format_double(vr.metrics.total_cost);
    }
    log << "\n";
  }
  return exit_ok;
}

// eval: greedy evaluation of a checkpointed actor on an environment preset.
inline int cmd_eval(const std::string& checkpoint_path, const RunConfig& cfg,
                    std::ostream& out = std::cout) {
  const AgentSnapshot snap = load_agent_snapshot_file(checkpoint_path);
  const EnvSpec env = resolve_env(cfg);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.n_eval_seeds; ++i) seeds.push_back(cfg.eval_seed_base + i);
  const Vec totals = evaluate_policy(snap.actor, env, seeds, env.episode_len);
  out << "seed,total_cost\n";
  double mean = 0.0;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    out << seeds[i] << ',' << format_double(totals[i]) << '\n';
    mean += totals[i];
  }
  mean /= static_cast<double>(totals.size());
  out << "mean," << format_double(mean) << '\n';
  return exit_ok;
}

// probe-variance: Theorem-2 gradient-variance probe on an agent checkpoint.
inline int cmd_probe_variance(const std::string& checkpoint_path, const RunConfig& cfg,
                              std::size_t batch_size, std::size_t n_batches,
                              std::ostream& log = std::cout) {
  if (!std::filesystem::exists(checkpoint_path)) {
    throw ConfigError("probe-variance: checkpoint '" + checkpoint_path + "' not found");
  }
  const AgentSnapshot snap = load_agent_snapshot_file(checkpoint_path);
  const VarianceProbeResult result = variance_probe(snap, batch_size, n_batches);
  const std::string dir = detail::resolved_output_dir(cfg);
  detail::ensure_dir(dir);
  auto out = open_csv(dir + "/variance.csv");
  write_variance_csv(out, result);
  log << "probe-variance: var_q=" << format_double(result.var_q)
      << " var_td_linear=" << format_double(result.var_td_linear)
      << " var_td_squared=" << format_double(result.var_td_squared) << "\n";
  return exit_ok;
}

// riccati: discounted Riccati oracle for the configured LQR preset.
inline int cmd_riccati(const RunConfig& cfg, std::ostream& out = std::cout) {
  const EnvSpec env = resolve_env(cfg);
  if (env.kind != EnvKind::lqr) {
    throw ConfigError("riccati: environment '" + cfg.env_name + "' is not an LQR preset");
  }
  const RiccatiSolution sol = riccati_solve(env.lqr, cfg.gamma, cfg.riccati_tol);
  out << "P";
  for (double v : sol.P.data) out << ' ' << format_double(v);
  out << "\nK";
  for (double v : sol.K.data) out << ' ' << format_double(v);
  out << "\nresidual " << format_double(sol.residual) << "\niterations "
      << sol.iterations << "\n";
  return exit_ok;
}

// check: named property suites with a pass/fail table; exit 1 carries the
// first failing suite name.
inline int cmd_check(const std::vector<std::string>& suites, std::ostream& out = std::cout) {
  const auto results = run_check_suites(suites);
  out << suites.size() << " suites\n";
  std::string first_failure;
  for (const SuiteResult& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name;
    if (!r.pass) {
      out << " (" << r.detail << ")";
      if (first_failure.empty()) first_failure = r.name;
    }
    out << "\n";
  }
  if (!first_failure.empty()) {
    out << "first failing property: " << first_failure << "\n";
    return exit_property_failure;
  }
  return exit_ok;
}

// sweep: one phased variant across all three transition functions.
inline int cmd_sweep(const RunConfig& cfg, std::ostream& log = std::cout) {
  for (Variant v : cfg.variants) {
    if (variant_actor_mode(v) != ActorMode::phased) {
      throw ConfigError(std::string("sweep: variant ") + variant_name(v) +
                        " has no transition function (pick dhdp_paac or ddpg_paac)");
    }
  }
  const std::string dir = detail::resolved_output_dir(cfg);
  detail::ensure_dir(dir);
  auto metrics_out = open_csv(dir + "/sweep_metrics.csv");
  metrics_out << "schedule,variant,total_cost,learning_variance,robustness,auc,"
                 "success_rate\n";
  for (PhaseKind kind : {PhaseKind::linear, PhaseKind::quadratic, PhaseKind::hard_switch}) {
    RunConfig pass = cfg;
    pass.schedule_kind = kind;
    const char* kind_name = kind == PhaseKind::linear      ? "linear"
                            : kind == PhaseKind::quadratic ? "quadratic"
                                                           : "hard_switch";
    const ExperimentResult result = run_experiment(to_experiment_config(pass));
    detail::write_experiment_outputs(dir, pass, result, std::string("_") + kind_name);
    for (const VariantResult& vr : result.variants) {
      metrics_out << kind_name << ',' << variant_name(vr.variant);
      if (vr.metrics_defined) {
        metrics_out << ',' << format_double(vr.metrics.total_cost) << ','
                    << format_double(vr.metrics.learning_variance) << ','
                    << format_double(vr.metrics.robustness) << ','
                    << format_double(vr.metrics.auc) << ','
                    << format_double(vr.metrics.success_rate);
      } else {
        metrics_out << ",nan,nan,nan,nan,0";
      }
      metrics_out << '\n';
    }
    log << "sweep: finished schedule " << kind_name << "\n";
  }
  return exit_ok;
}

// Maps the error taxonomy onto the stable exit codes.
template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err = std::cerr) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const OracleError& e) {
    err << "oracle error: " << e.what() << "\n";
    return exit_oracle_error;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return exit_io_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_property_failure;
  }
}

}  // namespace paac
