#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paac/adam.hpp"
#include "paac/common.hpp"
#include "paac/envs.hpp"
#include "paac/networks.hpp"
#include "paac/paac.hpp"
#include "paac/phase.hpp"
#include "paac/replay.hpp"
#include "paac/rng.hpp"

namespace paac {

// The seven algorithm variants. Each one pins a (replay, target-mode,
// actor-mode) triple; build_agent rejects configs that stray off this
// lattice.
enum class Variant {
  vanilla_dhdp,  // no replay, no targets, Q-gradient actor
  dhdp_er,       // no replay, hard targets
  dhdp_target,   // replay, no targets
  dhdp,          // replay, hard targets ("updated dHDP")
  dhdp_paac,     // replay, hard targets, phased actor
  ddpg,          // replay, soft targets
  ddpg_paac,     // replay, soft targets, phased actor
};

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::vanilla_dhdp: return "vanilla_dhdp";
    case Variant::dhdp_er: return "dhdp_er";
    case Variant::dhdp_target: return "dhdp_target";
    case Variant::dhdp: return "dhdp";
    case Variant::dhdp_paac: return "dhdp_paac";
    case Variant::ddpg: return "ddpg";
    case Variant::ddpg_paac: return "ddpg_paac";
  }
  return "?";
}

inline Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::vanilla_dhdp, Variant::dhdp_er, Variant::dhdp_target,
                    Variant::dhdp, Variant::dhdp_paac, Variant::ddpg,
                    Variant::ddpg_paac}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

struct AgentConfig {
  Variant variant = Variant::ddpg;
  double gamma = 0.99;
  std::size_t minibatch_n = 256;
  std::size_t buffer_capacity = 200000;
  TargetMode target_mode = TargetMode::soft(0.05);
  ActorGradMode actor_mode{ActorMode::q_only, TdForm::squared_delta};
  PhaseSchedule schedule{PhaseKind::linear, 0};
  double noise_scale = 0.1;
  std::size_t warmup_steps = 8000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 256;
  std::size_t updates_per_step = 1;
};

inline bool variant_uses_replay(Variant v) {
  return v != Variant::vanilla_dhdp && v != Variant::dhdp_er;
}

inline TargetUpdateKind variant_target_kind(Variant v) {
  switch (v) {
    case Variant::vanilla_dhdp:
    case Variant::dhdp_target:
      return TargetUpdateKind::none;
    case Variant::dhdp_er:
    case Variant::dhdp:
    case Variant::dhdp_paac:
      return TargetUpdateKind::hard;
    case Variant::ddpg:
    case Variant::ddpg_paac:
      return TargetUpdateKind::soft;
  }
  return TargetUpdateKind::none;
}

inline ActorMode variant_actor_mode(Variant v) {
  return (v == Variant::dhdp_paac || v == Variant::ddpg_paac) ? ActorMode::phased
                                                              : ActorMode::q_only;
}

// Fills the lattice-determined fields for a variant, leaving the numeric
// hyperparameters (tau = 0.05, period = 15 by default) adjustable.
inline AgentConfig default_config_for(Variant v, std::size_t total_steps) {
  AgentConfig cfg;
  cfg.variant = v;
  cfg.schedule.k_total = total_steps;
  switch (variant_target_kind(v)) {
    case TargetUpdateKind::none:
      cfg.target_mode = TargetMode::none();
      break;
    case TargetUpdateKind::hard:
      cfg.target_mode = TargetMode::hard(15);
      break;
    case TargetUpdateKind::soft:
      cfg.target_mode = TargetMode::soft(0.05);
      break;
  }
  cfg.actor_mode.mode = variant_actor_mode(v);
  return cfg;
}

inline void validate_agent_config(const AgentConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) {
    throw ConfigError("config: gamma must lie in (0,1)");
  }
  if (cfg.minibatch_n == 0) throw ConfigError("config: minibatch_n must be >= 1");
  if (cfg.lr <= 0.0) throw ConfigError("config: lr must be positive");
  if (cfg.noise_scale < 0.0) throw ConfigError("config: noise_scale must be >= 0");
  if (cfg.updates_per_step == 0) throw ConfigError("config: updates_per_step must be >= 1");
  if (cfg.target_mode.kind != variant_target_kind(cfg.variant)) {
    throw ConfigError(std::string("config: variant ") + variant_name(cfg.variant) +
                      " requires target mode '" +
                      (variant_target_kind(cfg.variant) == TargetUpdateKind::hard
                           ? "hard"
                           : variant_target_kind(cfg.variant) == TargetUpdateKind::soft
                                 ? "soft"
                                 : "none") +
                      "'");
  }
  if (cfg.target_mode.kind == TargetUpdateKind::hard && cfg.target_mode.period == 0) {
    throw ConfigError("config: hard target period must be >= 1");
  }
  if (cfg.target_mode.kind == TargetUpdateKind::soft &&
      !(cfg.target_mode.tau > 0.0 && cfg.target_mode.tau <= 1.0)) {
    throw ConfigError("config: soft target tau must lie in (0,1]");
  }
  if (cfg.actor_mode.mode != variant_actor_mode(cfg.variant)) {
    throw ConfigError(std::string("config: variant ") + variant_name(cfg.variant) +
                      (variant_actor_mode(cfg.variant) == ActorMode::phased
                           ? " requires the phased actor"
                           : " requires the q_only actor"));
  }
  if (!variant_uses_replay(cfg.variant) && cfg.buffer_capacity != 1) {
    throw ConfigError(std::string("config: variant ") + variant_name(cfg.variant) +
                      " runs without experience replay (buffer_capacity must be 1)");
  }
  if (cfg.actor_mode.mode == ActorMode::phased && cfg.schedule.k_total == 0) {
    throw ConfigError("config: phased actor needs schedule.k_total >= 1");
  }
}

// Per-step scalar log record. branch is -1 before any actor update occurs
// on a step (warmup), 0 for the Q branch and 1 for the TD branch.
struct StepRecord {
  double critic_loss = 0.0;
  double phase_m = 0.0;
  int branch = -1;
};

struct EvalRecord {
  std::size_t step = 0;
  Vec per_seed_costs;
  double mean_cost = 0.0;
};

struct TrainingLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  bool aborted = false;
  std::string abort_reason;
  std::size_t abort_step = 0;
};

struct AgentState {
  AgentConfig cfg;
  ActorNet actor;
  CriticNet critic;
  TargetPair targets;
  ReplayBuffer buffer;
  AdamState actor_adam;
  AdamState critic_adam;
  Rng action_rng;   // exploration noise and warmup actions
  Rng sample_rng;   // minibatch draws
  Rng omega_rng;    // branch selection
  GradWorkspace ws;

  AgentState(AgentConfig c, ActorNet a, CriticNet q, TargetPair t)
      : cfg(c),
        actor(std::move(a)),
        critic(std::move(q)),
        targets(std::move(t)),
        buffer(c.buffer_capacity),
        actor_adam(make_adam(actor.params, c.lr)),
        critic_adam(make_adam(critic.params, c.lr)),
        action_rng(derive_seed(c.seed, 0xA0ULL)),
        sample_rng(derive_seed(c.seed, 0xA1ULL)),
        omega_rng(derive_seed(c.seed, 0xA2ULL)) {}
};

inline AgentState build_agent(const AgentConfig& cfg, const EnvSpec& env) {
  validate_agent_config(cfg);
  auto [actor, critic, targets] =
      init_agent_networks(cfg.seed, env.state_dim, env.action_dim, env.action_bound,
                          cfg.hidden_width, cfg.target_mode);
  return AgentState(cfg, std::move(actor), std::move(critic), std::move(targets));
}

// i.i.d. Gaussian noise, per-dimension std = scale * action_bound.
inline Vec exploration_noise(Rng& rng, const Vec& action_bound, double scale) {
  if (scale < 0.0) throw ContractError("exploration_noise: scale must be >= 0");
  Vec noise(action_bound.size(), 0.0);
  if (scale == 0.0) return noise;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    noise[i] = scale * action_bound[i] * rng.normal();
  }
  return noise;
}

struct EnvInstance {
  EnvSpec spec;
  Vec state;
};

namespace detail {

inline void clamp_action(Vec& action, const Vec& bound) {
  for (std::size_t i = 0; i < action.size(); ++i) {
    action[i] = paac::detail::clamp(action[i], -bound[i], bound[i]);
  }
}

// One learning iteration: refresh aliased targets, critic step, omega
// draw, actor step, target tick.
inline StepRecord learn_once(AgentState& agent, std::size_t k) {
  StepRecord rec;
  if (agent.targets.mode.kind == TargetUpdateKind::none) {
    copy_targets(agent.targets, agent.actor, agent.critic);
  }
  const Batch batch = agent.buffer.sample(agent.cfg.minibatch_n, agent.sample_rng);
  rec.critic_loss = critic_update(agent.critic, batch, agent.targets, agent.cfg.gamma,
                                  agent.critic_adam, agent.ws);
  const double omega = agent.omega_rng.uniform();
  rec.phase_m = phase_value(agent.cfg.schedule, k);
  if (agent.cfg.actor_mode.mode == ActorMode::phased) {
    rec.branch = select_branch(rec.phase_m, omega) == Branch::q_value ? 0 : 1;
  } else {
    rec.branch = agent.cfg.actor_mode.mode == ActorMode::q_only ? 0 : 1;
  }
  const NetParams grad =
      actor_gradient(agent.cfg.actor_mode, agent.cfg.schedule, k, omega, batch,
                     agent.critic, agent.actor, agent.targets, agent.cfg.gamma, agent.ws);
  actor_update(agent.actor, grad, agent.actor_adam);
  switch (agent.targets.mode.kind) {
    case TargetUpdateKind::hard:
      agent.targets = hard_update_tick(std::move(agent.targets), agent.actor, agent.critic);
      break;
    case TargetUpdateKind::soft:
      agent.targets = soft_update(std::move(agent.targets), agent.actor, agent.critic);
      break;
    case TargetUpdateKind::none:
      break;
  }
  return rec;
}

}  // namespace detail

struct TrainStepResult {
  Transition transition;
  StepRecord record;
};

// One Algorithm-1 inner iteration at global step k: act (random during
// warmup, noisy policy after), store, then learn.
inline TrainStepResult train_step(AgentState& agent, EnvInstance& env, std::size_t k) {
  TrainStepResult out;
  Vec action;
  if (k < agent.cfg.warmup_steps) {
    action.resize(env.spec.action_dim);
    for (std::size_t i = 0; i < action.size(); ++i) {
      action[i] = agent.action_rng.uniform(-env.spec.action_bound[i],
                                           env.spec.action_bound[i]);
    }
  } else {
    action = actor_forward(agent.actor, env.state);
    const Vec noise =
        exploration_noise(agent.action_rng, env.spec.action_bound, agent.cfg.noise_scale);
    for (std::size_t i = 0; i < action.size(); ++i) action[i] += noise[i];
    detail::clamp_action(action, env.spec.action_bound);
  }
  StepResult sr = env_step(env.spec, env.state, action);
  out.transition =
      Transition{env.state, action, sr.cost, sr.next_state, sr.terminal};
  agent.buffer.push(out.transition);
  env.state = std::move(sr.next_state);

  if (k >= agent.cfg.warmup_steps) {
    for (std::size_t rep = 0; rep < agent.cfg.updates_per_step; ++rep) {
      out.record = detail::learn_once(agent, k);
    }
  } else {
    out.record.phase_m = phase_value(agent.cfg.schedule, k);
  }
  return out;
}

// Greedy evaluation: one fixed-length episode per seed, zero exploration
// noise, total (undiscounted) stage cost per episode.
inline Vec evaluate_policy(const ActorNet& actor, const EnvSpec& spec,
                           const std::vector<std::uint64_t>& seeds,
                           std::size_t episode_len) {
  Vec totals;
  totals.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    Vec x = env_reset(spec, seed);
    double total = 0.0;
    for (std::size_t t = 0; t < episode_len; ++t) {
      Vec a = actor_forward(actor, x);
      StepResult r = env_step(spec, x, a);
      total += r.cost;
      x = std::move(r.next_state);
      if (r.terminal) break;
    }
    totals.push_back(total);
  }
  return totals;
}

inline EvalRecord make_eval_record(std::size_t step, Vec per_seed) {
  EvalRecord rec;
  rec.step = step;
  rec.mean_cost = 0.0;
  for (double c : per_seed) rec.mean_cost += c;
  if (!per_seed.empty()) rec.mean_cost /= static_cast<double>(per_seed.size());
  rec.per_seed_costs = std::move(per_seed);
  return rec;
}

// Final networks alongside the log, for checkpointing and probes.
struct TrialResult {
  TrainingLog log;
  AgentState agent;
};

// A complete seeded training run with periodic greedy evaluation. The
// initial policy is evaluated at step 0; evaluations then occur every
// eval_period steps. Numeric failures abort the trial but return the log
// collected so far.
inline TrialResult run_trial_with_agent(const AgentConfig& cfg, const EnvSpec& env_spec,
                                        std::size_t total_steps, std::size_t eval_period,
                                        const std::vector<std::uint64_t>& eval_seeds) {
  if (cfg.schedule.k_total != total_steps) {
    throw ContractError("run_trial: schedule.k_total must equal total_steps");
  }
  if (eval_period == 0) throw ContractError("run_trial: eval_period must be >= 1");
  TrialResult result{TrainingLog{}, build_agent(cfg, env_spec)};
  TrainingLog& log = result.log;
  AgentState& agent = result.agent;
  EnvInstance env{env_spec, {}};
  log.evals.push_back(make_eval_record(
      0, evaluate_policy(agent.actor, env_spec, eval_seeds, env_spec.episode_len)));
  log.steps.reserve(total_steps);
  std::size_t episode_index = 0;
  std::size_t episode_step = 0;
  env.state = env_reset(env_spec, derive_seed(cfg.seed, 0xEB0ULL + episode_index));
  try {
    for (std::size_t k = 0; k < total_steps; ++k) {
      TrainStepResult step = train_step(agent, env, k);
      log.steps.push_back(step.record);
      episode_step += 1;
      if (step.transition.terminal || episode_step >= env_spec.episode_len) {
        episode_index += 1;
        episode_step = 0;
        env.state = env_reset(env_spec, derive_seed(cfg.seed, 0xEB0ULL + episode_index));
      }
      if ((k + 1) % eval_period == 0) {
        log.evals.push_back(make_eval_record(
            k + 1,
            evaluate_policy(agent.actor, env_spec, eval_seeds, env_spec.episode_len)));
      }
    }
  } catch (const NumericError& e) {
    log.aborted = true;
    log.abort_reason = e.what();
    log.abort_step = log.steps.size();
  }
  return result;
}

inline TrainingLog run_trial(const AgentConfig& cfg, const EnvSpec& env_spec,
                             std::size_t total_steps, std::size_t eval_period,
                             const std::vector<std::uint64_t>& eval_seeds) {
  return run_trial_with_agent(cfg, env_spec, total_steps, eval_period, eval_seeds).log;
}

}  // namespace paac
