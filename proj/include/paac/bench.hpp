#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "paac/agents.hpp"
#include "paac/common.hpp"
#include "paac/envs.hpp"
#include "paac/snapshot.hpp"

namespace paac {

// Total evaluation costs indexed (trial, eval_index, env_seed). Metrics
// read the last up-to-10 evaluations; success_flags mark trials kept in
// the statistics.
struct EvalMatrix {
  std::size_t n_trials = 0;
  std::size_t n_evals = 0;
  std::size_t n_env_seeds = 0;
  std::vector<double> values;
  std::vector<char> success_flags;  // one per trial

  EvalMatrix() = default;
  EvalMatrix(std::size_t trials, std::size_t evals, std::size_t seeds)
      : n_trials(trials),
        n_evals(evals),
        n_env_seeds(seeds),
        values(trials * evals * seeds, 0.0),
        success_flags(trials, 1) {}

  double& at(std::size_t t, std::size_t e, std::size_t s) {
    return values[(t * n_evals + e) * n_env_seeds + s];
  }
  double at(std::size_t t, std::size_t e, std::size_t s) const {
    return values[(t * n_evals + e) * n_env_seeds + s];
  }

  std::size_t last_window() const { return n_evals < 10 ? n_evals : 10; }
  std::size_t first_eval_in_window() const { return n_evals - last_window(); }
};

struct MetricsRecord {
  double total_cost = 0.0;
  double learning_variance = 0.0;
  double robustness = 0.0;
  double auc = 0.0;
  double success_rate = 0.0;
};

namespace detail {

inline double seed_average(const EvalMatrix& m, std::size_t t, std::size_t e) {
  double acc = 0.0;
  for (std::size_t s = 0; s < m.n_env_seeds; ++s) acc += m.at(t, e, s);
  return acc / static_cast<double>(m.n_env_seeds);
}

// Population standard deviation; the {0,2} -> 1 convention the metric
// definitions rely on.
inline double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return std::sqrt(var);
}

inline std::vector<std::size_t> successful_trials(const EvalMatrix& m) {
  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < m.n_trials; ++t) {
    if (m.success_flags[t]) keep.push_back(t);
  }
  if (keep.empty()) {
    throw MetricError("metrics: no successful trials in the evaluation matrix");
  }
  return keep;
}

}  // namespace detail

// Mean over (successful trials x last-10 evals) of the per-evaluation
// env-seed average.
inline double metric_total_cost(const EvalMatrix& m) {
  const auto trials = detail::successful_trials(m);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t : trials) {
    for (std::size_t e = m.first_eval_in_window(); e < m.n_evals; ++e) {
      acc += detail::seed_average(m, t, e);
      count += 1;
    }
  }
  return acc / static_cast<double>(count);
}

// Standard deviation of the (up to) 100 seed-averaged totals formed by
// (successful trial, last-10 eval) pairs.
inline double metric_learning_variance(const EvalMatrix& m) {
  const auto trials = detail::successful_trials(m);
  std::vector<double> averaged;
  for (std::size_t t : trials) {
    for (std::size_t e = m.first_eval_in_window(); e < m.n_evals; ++e) {
      averaged.push_back(detail::seed_average(m, t, e));
    }
  }
  return detail::population_std(averaged);
}

// Per successful trial: std of its (last-10 eval x env seed) totals; then
// the mean of those stds.
inline double metric_robustness(const EvalMatrix& m) {
  const auto trials = detail::successful_trials(m);
  double acc = 0.0;
  for (std::size_t t : trials) {
    std::vector<double> cells;
    for (std::size_t e = m.first_eval_in_window(); e < m.n_evals; ++e) {
      for (std::size_t s = 0; s < m.n_env_seeds; ++s) cells.push_back(m.at(t, e, s));
    }
    acc += detail::population_std(cells);
  }
  return acc / static_cast<double>(trials.size());
}

// Normalized trapezoidal area under a (step, mean total cost) learning
// curve: 1.0 for a constant curve at the normalizer, 0.0 at zero cost.
inline double metric_auc(const std::vector<std::pair<double, double>>& curve,
                         double normalizer) {
  if (curve.size() < 2) throw MetricError("metric_auc: need at least two curve points");
  if (normalizer <= 0.0) throw MetricError("metric_auc: normalizer must be positive");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dx = curve[i].first - curve[i - 1].first;
    if (dx <= 0.0) throw MetricError("metric_auc: steps must be strictly increasing");
    area += 0.5 * (curve[i].second + curve[i - 1].second) * dx;
  }
  const double span = curve.back().first - curve.front().first;
  return area / (span * normalizer);
}

// Fraction of (trial, last-10 eval) cells whose seed-averaged total cost
// beats (is strictly below) the task threshold. All trials count here;
// the per-trial success flags are derived from the same threshold.
inline double metric_success(const EvalMatrix& m, double threshold) {
  if (!std::isfinite(threshold)) throw ConfigError("metric_success: threshold not set");
  std::size_t hits = 0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < m.n_trials; ++t) {
    for (std::size_t e = m.first_eval_in_window(); e < m.n_evals; ++e) {
      hits += detail::seed_average(m, t, e) < threshold ? 1 : 0;
      count += 1;
    }
  }
  return count == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(count);
}

// A trial is unsuccessful when every one of its last-10 seed-averaged
// evaluations exceeds the threshold.
inline void compute_success_flags(EvalMatrix& m, double threshold) {
  for (std::size_t t = 0; t < m.n_trials; ++t) {
    bool any_hit = false;
    for (std::size_t e = m.first_eval_in_window(); e < m.n_evals; ++e) {
      if (detail::seed_average(m, t, e) <= threshold) {
        any_hit = true;
        break;
      }
    }
    m.success_flags[t] = any_hit ? 1 : 0;
  }
}

// -------- Theorem-2 gradient-variance probe --------

struct VarianceProbeResult {
  double var_q = 0.0;
  double var_td_linear = 0.0;
  double var_td_squared = 0.0;
  std::size_t n_batches = 0;
  std::size_t batch_size = 0;
};

namespace detail {

inline void flatten_accumulate(const NetParams& g, std::vector<double>& sum,
                               std::vector<double>& sum_sq) {
  std::size_t idx = 0;
  auto add = [&](const Vec& block) {
    for (double v : block) {
      sum[idx] += v;
      sum_sq[idx] += v * v;
      ++idx;
    }
  };
  for (int l = 0; l < 3; ++l) add(g.weights[l].data);
  for (int l = 0; l < 3; ++l) add(g.biases[l]);
}

// Trace of the empirical (population) covariance of the flattened actor
// gradient over n_batches independently drawn minibatches. The same seed
// is used for every branch so the linear-delta and Q branches see
// identical batches.
inline double branch_gradient_variance(const AgentSnapshot& snap, ActorGradMode mode,
                                       std::size_t batch_size, std::size_t n_batches,
                                       std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x9B0BEULL));
  const std::size_t dim = snap.actor.params.param_count();
  std::vector<double> sum(dim, 0.0), sum_sq(dim, 0.0);
  GradWorkspace ws;
  const PhaseSchedule dummy{PhaseKind::linear, 1};
  Batch batch;
  for (std::size_t b = 0; b < n_batches; ++b) {
    batch.clear();
    for (std::size_t i = 0; i < batch_size; ++i) {
      batch.push_back(snap.transitions[rng.uniform_index(snap.transitions.size())]);
    }
    const NetParams g = actor_gradient(mode, dummy, 0, 0.0, batch, snap.critic,
                                       snap.actor, snap.targets, snap.gamma, ws);
    flatten_accumulate(g, sum, sum_sq);
  }
  const double inv_n = 1.0 / static_cast<double>(n_batches);
  double trace = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double mean = sum[i] * inv_n;
    trace += sum_sq[i] * inv_n - mean * mean;
  }
  return trace;
}

}  // namespace detail

inline VarianceProbeResult variance_probe(const AgentSnapshot& snap,
                                          std::size_t batch_size, std::size_t n_batches,
                                          std::uint64_t seed = 0) {
  if (snap.transitions.empty()) {
    throw EmptyBufferError("variance_probe: snapshot has no transitions");
  }
  VarianceProbeResult r;
  r.batch_size = batch_size;
  r.n_batches = n_batches;
  r.var_q = detail::branch_gradient_variance(
      snap, ActorGradMode{ActorMode::q_only, TdForm::linear_delta}, batch_size,
      n_batches, seed);
  r.var_td_linear = detail::branch_gradient_variance(
      snap, ActorGradMode{ActorMode::td_only, TdForm::linear_delta}, batch_size,
      n_batches, seed);
  r.var_td_squared = detail::branch_gradient_variance(
      snap, ActorGradMode{ActorMode::td_only, TdForm::squared_delta}, batch_size,
      n_batches, seed);
  return r;
}

// -------- multi-trial experiment runner --------

struct ExperimentConfig {
  EnvSpec env;
  std::vector<Variant> variants;
  std::size_t n_trials = 10;
  std::uint64_t trial_seed_base = 0;
  std::uint64_t eval_seed_base = 100;
  std::size_t n_eval_seeds = 10;
  std::size_t total_steps = 20000;
  std::size_t eval_period = 5000;
  double success_threshold = std::numeric_limits<double>::quiet_NaN();  // NaN = auto
  std::size_t jobs = 1;
  double target_tau = 0.05;       // soft-target variants
  std::size_t target_period = 15; // hard-target variants
  AgentConfig agent_template;     // numeric hyperparameters shared by variants
};

struct VariantResult {
  Variant variant = Variant::ddpg;
  EvalMatrix matrix;
  MetricsRecord metrics;
  bool metrics_defined = false;
  std::vector<TrainingLog> logs;        // per trial
  std::vector<AgentSnapshot> snapshots; // per trial
  std::vector<std::pair<double, double>> mean_curve;
};

struct ExperimentResult {
  std::vector<VariantResult> variants;
  double success_threshold = 0.0;
  double auc_normalizer = 0.0;
};

// Default success/failure threshold per task; LQR thresholds derive from
// the Riccati oracle at experiment setup.
inline double default_success_threshold(const EnvSpec& env, double gamma,
                                        std::uint64_t eval_seed_base,
                                        std::size_t n_eval_seeds) {
  switch (env.kind) {
    case EnvKind::lqr: {
      const RiccatiSolution sol = riccati_solve(env.lqr, gamma, 1e-12);
      double mean_opt = 0.0;
      for (std::size_t i = 0; i < n_eval_seeds; ++i) {
        const Vec x0 = env_reset(env, eval_seed_base + i);
        mean_opt += quadratic_form(x0, sol.P, x0);
      }
      mean_opt /= static_cast<double>(n_eval_seeds);
      return 1.1 * mean_opt;
    }
    case EnvKind::cartpole_balance:
      return 0.2 * static_cast<double>(env.episode_len);
    case EnvKind::pendulum_swingup:
      return 0.3 * static_cast<double>(env.episode_len);
  }
  throw ContractError("default_success_threshold: unreachable");
}

// Normalizer anchoring AUC = 1 at "always at maximum cost": episode_len
// for unit-cost tasks, the zero-policy cost from the worst corner for LQR.
inline double auc_normalizer(const EnvSpec& env) {
  if (env.cost_normalized) return static_cast<double>(env.episode_len);
  return zero_policy_cost(env, lqr_worst_corner(env), env.episode_len);
}

inline ExperimentResult run_experiment(const ExperimentConfig& exp) {
  if (exp.variants.empty()) throw ConfigError("run_experiment: no variants selected");
  if (exp.n_trials == 0) throw ConfigError("run_experiment: n_trials must be >= 1");
  ExperimentResult result;
  result.success_threshold =
      std::isnan(exp.success_threshold)
          ? default_success_threshold(exp.env, exp.agent_template.gamma,
                                      exp.eval_seed_base, exp.n_eval_seeds)
          : exp.success_threshold;
  result.auc_normalizer = auc_normalizer(exp.env);

  std::vector<std::uint64_t> eval_seeds;
  for (std::size_t i = 0; i < exp.n_eval_seeds; ++i) {
    eval_seeds.push_back(exp.eval_seed_base + i);
  }

  for (Variant v : exp.variants) {
    VariantResult vr;
    vr.variant = v;
    vr.logs.resize(exp.n_trials);
    vr.snapshots.resize(exp.n_trials);

    auto run_one = [&](std::size_t trial) {
      AgentConfig cfg = default_config_for(v, exp.total_steps);
      cfg.gamma = exp.agent_template.gamma;
      cfg.minibatch_n = exp.agent_template.minibatch_n;
      cfg.buffer_capacity =
          variant_uses_replay(v) ? exp.agent_template.buffer_capacity : 1;
      cfg.noise_scale = exp.agent_template.noise_scale;
      cfg.warmup_steps = exp.agent_template.warmup_steps;
      cfg.lr = exp.agent_template.lr;
      cfg.hidden_width = exp.agent_template.hidden_width;
      cfg.updates_per_step = exp.agent_template.updates_per_step;
      cfg.schedule.kind = exp.agent_template.schedule.kind;
      cfg.actor_mode.td_form = exp.agent_template.actor_mode.td_form;
      if (cfg.target_mode.kind == TargetUpdateKind::hard) {
        cfg.target_mode.period = exp.target_period;
      } else if (cfg.target_mode.kind == TargetUpdateKind::soft) {
        cfg.target_mode.tau = exp.target_tau;
      }
      cfg.seed = exp.trial_seed_base + trial;
      TrialResult tr = run_trial_with_agent(cfg, exp.env, exp.total_steps,
                                            exp.eval_period, eval_seeds);
      vr.snapshots[trial] = snapshot_agent(tr.agent);
      vr.logs[trial] = std::move(tr.log);
    };

    if (exp.jobs > 1) {
      std::vector<std::thread> pool;
      const std::size_t workers = std::min(exp.jobs, exp.n_trials);
      std::atomic<std::size_t> cursor{0};
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
          for (;;) {
            const std::size_t t = cursor.fetch_add(1);
            if (t >= exp.n_trials) return;
            run_one(t);
          }
        });
      }
      for (auto& th : pool) th.join();
    } else {
      for (std::size_t t = 0; t < exp.n_trials; ++t) run_one(t);
    }

    // assemble the evaluation matrix (n_evals from the first complete log)
    std::size_t n_evals = 0;
    for (const auto& log : vr.logs) n_evals = std::max(n_evals, log.evals.size());
    vr.matrix = EvalMatrix(exp.n_trials, n_evals, exp.n_eval_seeds);
    for (std::size_t t = 0; t < exp.n_trials; ++t) {
      const auto& evals = vr.logs[t].evals;
      for (std::size_t e = 0; e < n_evals; ++e) {
        // aborted trials repeat their last known evaluation
        const EvalRecord& rec = e < evals.size() ? evals[e] : evals.back();
        for (std::size_t s = 0; s < exp.n_eval_seeds; ++s) {
          vr.matrix.at(t, e, s) = rec.per_seed_costs[s];
        }
      }
      if (vr.logs[t].aborted) vr.matrix.success_flags[t] = 0;
    }
    compute_success_flags(vr.matrix, result.success_threshold);
    for (std::size_t t = 0; t < exp.n_trials; ++t) {
      if (vr.logs[t].aborted) vr.matrix.success_flags[t] = 0;
    }

    // mean learning curve over successful trials
    bool any_success = false;
    for (char f : vr.matrix.success_flags) any_success |= (f != 0);
    if (any_success) {
      for (std::size_t e = 0; e < n_evals; ++e) {
        double acc = 0.0;
        std::size_t cnt = 0;
        std::size_t step = 0;
        for (std::size_t t = 0; t < exp.n_trials; ++t) {
          if (!vr.matrix.success_flags[t]) continue;
          acc += detail::seed_average(vr.matrix, t, e);
          cnt += 1;
          if (e < vr.logs[t].evals.size()) step = vr.logs[t].evals[e].step;
        }
        vr.mean_curve.emplace_back(static_cast<double>(step),
                                   acc / static_cast<double>(cnt));
      }
      vr.metrics.total_cost = metric_total_cost(vr.matrix);
      vr.metrics.learning_variance = metric_learning_variance(vr.matrix);
      vr.metrics.robustness = metric_robustness(vr.matrix);
      vr.metrics.auc = vr.mean_curve.size() >= 2
                           ? metric_auc(vr.mean_curve, result.auc_normalizer)
                           : 0.0;
      vr.metrics.success_rate = metric_success(vr.matrix, result.success_threshold);
      vr.metrics_defined = true;
    }
    result.variants.push_back(std::move(vr));
  }
  return result;
}

}  // namespace paac
