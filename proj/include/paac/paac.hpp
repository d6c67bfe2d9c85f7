#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "paac/adam.hpp"
#include "paac/common.hpp"
#include "paac/mlp.hpp"
#include "paac/networks.hpp"
#include "paac/phase.hpp"
#include "paac/replay.hpp"

namespace paac {

// How the actor gradient is formed. q_only reproduces the dHDP/DDPG
// estimator; phased switches stochastically between the Q branch and the
// TD branch according to M(k). The TD branch itself comes in two forms:
//   linear_delta:  d/dθ mean(δ)    — identical to the Q branch since the
//                                    target y carries no θ dependence
//   squared_delta: d/dθ mean(δ²/2) — per-sample gradient δ·∇Q, which damps
//                                    updates as the Bellman residual shrinks
enum class ActorMode { q_only, td_only, phased };
enum class TdForm { linear_delta, squared_delta };

struct ActorGradMode {
  ActorMode mode = ActorMode::q_only;
  TdForm td_form = TdForm::squared_delta;
};

// y = R + γ Q'(x', π'(x')); y = R at a true absorbing terminal. y is a
// constant w.r.t. the live networks by construction.
inline double bellman_target(const Transition& t, const TargetPair& targets,
                             double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ContractError("bellman_target: gamma must lie in (0,1)");
  }
  if (t.terminal) return t.cost;
  const Vec next_action = actor_forward(targets.actor, t.next_state);
  const double q_next = critic_forward(targets.critic, t.next_state, next_action);
  if (!std::isfinite(q_next)) {
    throw NumericError("bellman_target: target critic produced a non-finite value");
  }
  return gamma * q_next + t.cost;
}

// δ(θ) = Q(x, π(x|θ)) - y. The action fed to Q comes from the current
// policy, not the stored transition.
inline double td_error(const CriticNet& critic, const ActorNet& actor,
                       const Transition& t, double y) {
  const Vec policy_action = actor_forward(actor, t.state);
  return critic_forward(critic, t.state, policy_action) - y;
}

// Scratch space reused across training steps so the hot loop does not
// allocate per sample.
struct GradWorkspace {
  ForwardCache actor_cache;
  ForwardCache critic_cache;
  Vec concat;
  Vec action;
  Vec critic_input_grad;
  Vec actor_upstream;
  NetParams grads;
  bool grads_ready = false;
};

namespace detail {

inline NetParams& prepare_grads(GradWorkspace& ws, const NetParams& like) {
  if (!ws.grads_ready) {
    ws.grads = zeros_like(like);
    ws.grads_ready = true;
  } else {
    require_same_layout(ws.grads, like, "workspace grads");
    ws.grads.fill(0.0);
  }
  return ws.grads;
}

}  // namespace detail

// One Adam step on the mean squared Bellman error
//   L = (1/N) Σ (y_k - Q(x_k, u_k))²
// with Q evaluated at the stored action. Returns the pre-step loss.
inline double critic_update(CriticNet& critic, const Batch& batch,
                            const TargetPair& targets, double gamma,
                            AdamState& adam, GradWorkspace& ws) {
  if (batch.empty()) throw ContractError("critic_update: batch must be nonempty");
  NetParams& grads = detail::prepare_grads(ws, critic.params);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  Vec upstream(1);
  for (const Transition& t : batch) {
    const double y = bellman_target(t, targets, gamma);
    const double q = critic_forward(critic, t.state, t.action, ws.critic_cache, ws.concat);
    const double residual = q - y;
    loss += residual * residual * inv_n;
    // dL/dQ_k = 2 (Q_k - y_k) / N
    upstream[0] = 2.0 * residual * inv_n;
    mlp_backward_accum(critic.params, ws.critic_cache, upstream, 1.0, grads, nullptr);
  }
  if (!std::isfinite(loss)) throw NumericError("critic_update: non-finite loss");
  adam_step_inplace(critic.params, grads, adam);
  return loss;
}

inline double critic_update(CriticNet& critic, const Batch& batch,
                            const TargetPair& targets, double gamma, AdamState& adam) {
  GradWorkspace ws;
  return critic_update(critic, batch, targets, gamma, adam, ws);
}

namespace detail {

// Runs π then Q on one state, leaving both caches in the workspace.
// Returns Q(x, π(x|θ)).
inline double policy_grad_forward(const CriticNet& critic, const ActorNet& actor,
                                  const Vec& state, GradWorkspace& ws) {
  mlp_forward(actor.params, state, ws.actor_cache);
  ws.action = ws.actor_cache.post[2];
  for (std::size_t i = 0; i < ws.action.size(); ++i) {
    ws.action[i] *= actor.action_bound[i];
  }
  return critic_forward(critic, state, ws.action, ws.critic_cache, ws.concat);
}

// Accumulates weight * ∇_θ Q(x, π(x|θ)) into grads using the caches left by
// policy_grad_forward. The chain runs through the critic's action input
// with the critic parameters frozen, then through the bound scaling of the
// actor output.
inline void policy_grad_backward(const CriticNet& critic, const ActorNet& actor,
                                 std::size_t state_dim, double weight,
                                 GradWorkspace& ws, NetParams& grads) {
  static const Vec unit_upstream{1.0};
  mlp_input_grad(critic.params, ws.critic_cache, unit_upstream, ws.critic_input_grad);
  ws.actor_upstream.resize(ws.action.size());
  for (std::size_t i = 0; i < ws.action.size(); ++i) {
    ws.actor_upstream[i] = ws.critic_input_grad[state_dim + i] * actor.action_bound[i];
  }
  mlp_backward_accum(actor.params, ws.actor_cache, ws.actor_upstream, weight, grads,
                     nullptr);
}

}  // namespace detail

// Phased policy-gradient estimator. Resolves the branch from (mode, M(k),
// ω), then returns
//   (1/N) Σ w_k ∇_θ Q(x_k, π(x_k|θ))
// where w_k = 1 on the Q branch and on the linear-delta TD branch (∇δ = ∇Q
// because ∇y = 0), and w_k = δ_k on the squared-delta TD branch.
inline NetParams actor_gradient(ActorGradMode mode, const PhaseSchedule& schedule,
                                std::size_t k, double omega, const Batch& batch,
                                const CriticNet& critic, const ActorNet& actor,
                                const TargetPair& targets, double gamma,
                                GradWorkspace& ws) {
  if (batch.empty()) throw ContractError("actor_gradient: batch must be nonempty");
  Branch branch = Branch::q_value;
  switch (mode.mode) {
    case ActorMode::q_only:
      branch = Branch::q_value;
      break;
    case ActorMode::td_only:
      branch = Branch::td_error;
      break;
    case ActorMode::phased:
      branch = select_branch(phase_value(schedule, k), omega);
      break;
  }

  NetParams grads = zeros_like(actor.params);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const Transition& t : batch) {
    const double q = detail::policy_grad_forward(critic, actor, t.state, ws);
    double weight = inv_n;
    if (branch == Branch::td_error && mode.td_form == TdForm::squared_delta) {
      const double y = bellman_target(t, targets, gamma);
      weight *= (q - y);  // δ(θ) with the current policy's action
    }
    detail::policy_grad_backward(critic, actor, t.state.size(), weight, ws, grads);
  }
  for (int l = 0; l < 3; ++l) {
    if (!all_finite(grads.weights[l].data) || !all_finite(grads.biases[l])) {
      throw NumericError("actor_gradient: non-finite gradient in layer " +
                         std::to_string(l));
    }
  }
  return grads;
}

inline NetParams actor_gradient(ActorGradMode mode, const PhaseSchedule& schedule,
                                std::size_t k, double omega, const Batch& batch,
                                const CriticNet& critic, const ActorNet& actor,
                                const TargetPair& targets, double gamma) {
  GradWorkspace ws;
  return actor_gradient(mode, schedule, k, omega, batch, critic, actor, targets,
                        gamma, ws);
}

// One Adam descent step on the supplied gradient.
inline void actor_update(ActorNet& actor, const NetParams& grad, AdamState& adam) {
  adam_step_inplace(actor.params, grad, adam);
}

}  // namespace paac
