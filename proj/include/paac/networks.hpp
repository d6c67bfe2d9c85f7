#pragma once

#include <cstddef>
#include <tuple>

#include "paac/adam.hpp"
#include "paac/common.hpp"
#include "paac/mlp.hpp"
#include "paac/rng.hpp"

namespace paac {

// Policy network. Emitted actions are action_bound ⊙ tanh(raw), so every
// component i satisfies |a_i| <= action_bound[i].
struct ActorNet {
  NetParams params;
  Vec action_bound;
};

// Q network over the concatenated (state, action) input; scalar output.
struct CriticNet {
  NetParams params;
};

enum class TargetUpdateKind { hard, soft, none };

struct TargetMode {
  TargetUpdateKind kind = TargetUpdateKind::soft;
  std::size_t period = 15;  // hard mode
  double tau = 0.05;        // soft mode

  static TargetMode hard(std::size_t period) {
    return TargetMode{TargetUpdateKind::hard, period, 0.0};
  }
  static TargetMode soft(double tau) {
    return TargetMode{TargetUpdateKind::soft, 0, tau};
  }
  static TargetMode none() { return TargetMode{TargetUpdateKind::none, 0, 0.0}; }
};

// Delayed copies of the live networks used to form Bellman targets. In
// "none" mode the pair is re-synced from the live nets every learning
// iteration so targets behave exactly like the live networks.
struct TargetPair {
  ActorNet actor;
  CriticNet critic;
  TargetMode mode;
  std::size_t updates_since_copy = 0;
};

inline void actor_forward(const ActorNet& net, const Vec& state, ForwardCache& cache,
                          Vec& action) {
  mlp_forward(net.params, state, cache);
  action = cache.post[2];
  for (std::size_t i = 0; i < action.size(); ++i) action[i] *= net.action_bound[i];
}

inline Vec actor_forward(const ActorNet& net, const Vec& state) {
  ForwardCache cache;
  Vec action;
  actor_forward(net, state, cache, action);
  return action;
}

inline void concat_state_action(const Vec& state, const Vec& action, Vec& out) {
  out.resize(state.size() + action.size());
  std::copy(state.begin(), state.end(), out.begin());
  std::copy(action.begin(), action.end(), out.begin() + state.size());
}

inline double critic_forward(const CriticNet& net, const Vec& state, const Vec& action,
                             ForwardCache& cache, Vec& concat_scratch) {
  concat_state_action(state, action, concat_scratch);
  mlp_forward(net.params, concat_scratch, cache);
  return cache.post[2][0];
}

inline double critic_forward(const CriticNet& net, const Vec& state, const Vec& action) {
  ForwardCache cache;
  Vec scratch;
  return critic_forward(net, state, action, cache, scratch);
}

inline void copy_targets(TargetPair& targets, const ActorNet& live_actor,
                         const CriticNet& live_critic) {
  targets.actor.params = live_actor.params;
  targets.actor.action_bound = live_actor.action_bound;
  targets.critic.params = live_critic.params;
}

namespace detail {

inline void blend_block(Vec& target, const Vec& live, double tau) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = tau * live[i] + (1.0 - tau) * target[i];
  }
}

inline void blend_params(NetParams& target, const NetParams& live, double tau) {
  require_same_layout(target, live, "soft_update");
  for (int l = 0; l < 3; ++l) {
    blend_block(target.weights[l].data, live.weights[l].data, tau);
    blend_block(target.biases[l], live.biases[l], tau);
  }
}

}  // namespace detail

// p' <- tau p + (1 - tau) p', elementwise.
inline TargetPair soft_update(TargetPair targets, const ActorNet& live_actor,
                              const CriticNet& live_critic) {
  if (targets.mode.kind != TargetUpdateKind::soft) {
    throw ContractError("soft_update: target mode is not soft");
  }
  detail::blend_params(targets.actor.params, live_actor.params, targets.mode.tau);
  detail::blend_params(targets.critic.params, live_critic.params, targets.mode.tau);
  return targets;
}

// Counts learning iterations; copies the live parameters exactly every
// `period` ticks and resets the counter.
inline TargetPair hard_update_tick(TargetPair targets, const ActorNet& live_actor,
                                   const CriticNet& live_critic) {
  if (targets.mode.kind != TargetUpdateKind::hard) {
    throw ContractError("hard_update_tick: target mode is not hard");
  }
  targets.updates_since_copy += 1;
  if (targets.updates_since_copy >= targets.mode.period) {
    copy_targets(targets, live_actor, live_critic);
    targets.updates_since_copy = 0;
  }
  return targets;
}

// Fresh actor/critic with seeded weights; targets start as exact copies.
inline std::tuple<ActorNet, CriticNet, TargetPair> init_agent_networks(
    std::uint64_t seed, std::size_t state_dim, std::size_t action_dim,
    const Vec& action_bound, std::size_t hidden_width = 256,
    TargetMode mode = TargetMode::soft(0.05)) {
  if (state_dim < 1 || action_dim < 1) {
    throw ContractError("init_agent_networks: dims must be >= 1");
  }
  require_dim(action_bound, action_dim, "init_agent_networks: action_bound");
  Rng actor_rng(derive_seed(seed, 0x5eed0001ULL));
  Rng critic_rng(derive_seed(seed, 0x5eed0002ULL));
  ActorNet actor{init_params(actor_rng, state_dim, hidden_width, action_dim,
                             Activation::relu_relu_tanh),
                 action_bound};
  CriticNet critic{init_params(critic_rng, state_dim + action_dim, hidden_width, 1,
                               Activation::relu_relu_linear)};
  TargetPair targets{actor, critic, mode, 0};
  return {std::move(actor), std::move(critic), std::move(targets)};
}

}  // namespace paac
