#include <gtest/gtest.h>

#include <cmath>

#include "paac/grad_check.hpp"
#include "paac/paac.hpp"
#include "paac/phase.hpp"

using namespace paac;

namespace {

bool params_bit_equal(const NetParams& a, const NetParams& b) {
  for (int l = 0; l < 3; ++l) {
    if (a.weights[l].data != b.weights[l].data) return false;
    if (a.biases[l] != b.biases[l]) return false;
  }
  return true;
}

// Critic that outputs a constant c for every (state, action).
CriticNet constant_critic(std::size_t input_dim, double c) {
  CriticNet net{make_net(input_dim, 4, 4, 1, Activation::relu_relu_linear)};
  net.params.biases[2][0] = c;
  return net;
}

Transition random_transition(Rng& rng, std::size_t state_dim, std::size_t action_dim) {
  Transition t;
  t.state.resize(state_dim);
  t.next_state.resize(state_dim);
  t.action.resize(action_dim);
  for (double& v : t.state) v = rng.uniform(-1, 1);
  for (double& v : t.next_state) v = rng.uniform(-1, 1);
  for (double& v : t.action) v = rng.uniform(-1, 1);
  t.cost = rng.uniform(0, 1);
  return t;
}

}  // namespace

TEST(PhaseValue, LinearEndpoints) {
  const PhaseSchedule s{PhaseKind::linear, 1000};
  EXPECT_EQ(phase_value(s, 0), 1.0);
  EXPECT_EQ(phase_value(s, 1000), 0.0);
  EXPECT_EQ(phase_value(s, 5000), 0.0);  // clamped above
}

TEST(PhaseValue, QuadraticMidpoint) {
  const PhaseSchedule s{PhaseKind::quadratic, 1000};
  EXPECT_DOUBLE_EQ(phase_value(s, 500), 0.25);
  EXPECT_EQ(phase_value(s, 0), 1.0);
  EXPECT_EQ(phase_value(s, 1000), 0.0);
}

TEST(PhaseValue, HardSwitchTogglesAtHalfway) {
  const PhaseSchedule s{PhaseKind::hard_switch, 1000};
  EXPECT_EQ(phase_value(s, 499), 1.0);
  EXPECT_EQ(phase_value(s, 500), 0.0);
  EXPECT_EQ(phase_value(s, 0), 1.0);
  EXPECT_EQ(phase_value(s, 1000), 0.0);
}

TEST(PhaseValue, MonotoneNonincreasingOnDenseGrid) {
  for (PhaseKind kind :
       {PhaseKind::linear, PhaseKind::quadratic, PhaseKind::hard_switch}) {
    const PhaseSchedule s{kind, 10000};
    double prev = phase_value(s, 0);
    EXPECT_EQ(prev, 1.0);
    for (std::size_t k = 1; k <= 10000; ++k) {
      const double cur = phase_value(s, k);
      ASSERT_LE(cur, prev) << "kind " << static_cast<int>(kind) << " k " << k;
      prev = cur;
    }
    EXPECT_EQ(prev, 0.0);
  }
}

TEST(SelectBranch, DegenerateProbabilities) {
  EXPECT_EQ(select_branch(1.0, 0.0), Branch::q_value);
  EXPECT_EQ(select_branch(1.0, 1.0), Branch::q_value);
  EXPECT_EQ(select_branch(0.0, 0.5), Branch::td_error);
}

TEST(SelectBranch, FrequencyMatchesBinomialBound) {
  Rng rng(8675309);
  const double m = 0.3;
  const std::size_t draws = 100000;
  std::size_t q_count = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    if (select_branch(m, rng.uniform()) == Branch::q_value) q_count += 1;
  }
  const double freq = static_cast<double>(q_count) / draws;
  const double sigma = std::sqrt(m * (1 - m) / draws);
  EXPECT_NEAR(freq, m, 3.0 * sigma);
}

TEST(BellmanTarget, ZeroTargetCriticGivesStageCost) {
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 0.0);
  targets.mode = TargetMode::none();
  Transition t{{0.5}, {0.1}, 2.5, {0.3}, false};
  EXPECT_DOUBLE_EQ(bellman_target(t, targets, 0.99), 2.5);
}

TEST(BellmanTarget, DiscountedFormula) {
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 10.0);
  targets.mode = TargetMode::none();
  Transition t{{0.5}, {0.1}, 1.0, {0.3}, false};
  EXPECT_DOUBLE_EQ(bellman_target(t, targets, 0.99), 10.9);
}

TEST(BellmanTarget, TerminalNextStateDropsBootstrap) {
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 10.0);
  targets.mode = TargetMode::none();
  Transition t{{0.5}, {0.1}, 1.0, {0.3}, true};
  EXPECT_DOUBLE_EQ(bellman_target(t, targets, 0.99), 1.0);
}

TEST(BellmanTarget, RejectsGammaOutsideUnitInterval) {
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 0.0);
  Transition t{{0.5}, {0.1}, 1.0, {0.3}, false};
  EXPECT_THROW(bellman_target(t, targets, 1.0), ContractError);
  EXPECT_THROW(bellman_target(t, targets, 0.0), ContractError);
}

TEST(BellmanTarget, ConstantUnderActorPerturbation) {
  // perturbing the live actor never changes y (bit equality)
  Rng rng(41);
  auto [actor, critic, targets] = init_agent_networks(12, 2, 1, {1.0}, 8);
  Transition t = random_transition(rng, 2, 1);
  const double y0 = bellman_target(t, targets, 0.99);
  actor.params.fill(123.0);  // arbitrary live-actor change
  const double y1 = bellman_target(t, targets, 0.99);
  EXPECT_EQ(y0, y1);
}

TEST(TdError, ZeroWhenCriticMatchesTarget) {
  CriticNet critic = constant_critic(2, 3.0);
  ActorNet actor{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  Transition t{{0.5}, {0.1}, 1.0, {0.3}, false};
  EXPECT_DOUBLE_EQ(td_error(critic, actor, t, 3.0), 0.0);
}

TEST(TdError, FiveMinusThreeIsTwo) {
  CriticNet critic = constant_critic(2, 5.0);
  ActorNet actor{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  Transition t{{0.5}, {0.1}, 1.0, {0.3}, false};
  EXPECT_DOUBLE_EQ(td_error(critic, actor, t, 3.0), 2.0);
}

TEST(TdError, UsesCurrentPolicyActionNotStoredAction) {
  // critic that returns the action input: Q(x, u) = u
  CriticNet critic{make_net(2, 2, 2, 1, Activation::relu_relu_linear)};
  critic.params.weights[0].data = {0.0, 1.0, 0.0, -1.0};  // h1 = [relu(u), relu(-u)]
  critic.params.weights[1].data = {1.0, 0.0, 0.0, 1.0};
  critic.params.weights[2].data = {1.0, -1.0};
  // actor that always emits tanh(large) * 1.0 = ~1.0
  ActorNet actor{make_net(1, 2, 2, 1, Activation::relu_relu_tanh), {1.0}};
  actor.params.fill(0.0);
  actor.params.biases[0] = {30.0, 30.0};
  actor.params.weights[1].data = {1.0, 0.0, 0.0, 1.0};
  actor.params.weights[2].data = {1.0, 0.0};
  actor.params.biases[2] = {0.0};
  Transition t{{0.5}, {-0.7}, 0.0, {0.5}, false};  // stored action -0.7
  const double delta = td_error(critic, actor, t, 0.0);
  EXPECT_NEAR(delta, std::tanh(30.0), 1e-12);  // ~ +1, not -0.7
}

TEST(CriticUpdate, PerfectCriticHasZeroLossAndNoChange) {
  CriticNet critic = constant_critic(2, 1.0);
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 0.0);
  targets.mode = TargetMode::none();
  // y = R = 1 for every sample; Q = 1 everywhere
  Batch batch;
  Rng rng(6);
  for (int i = 0; i < 8; ++i) {
    Transition t = random_transition(rng, 1, 1);
    t.cost = 1.0;
    batch.push_back(t);
  }
  const NetParams before = critic.params;
  AdamState adam = make_adam(critic.params, 1e-3);
  const double loss = critic_update(critic, batch, targets, 0.99, adam);
  EXPECT_EQ(loss, 0.0);
  EXPECT_TRUE(params_bit_equal(critic.params, before));
}

TEST(CriticUpdate, GradientMatchesFiniteDifferencesAndAdamDelegation) {
  Rng rng(91);
  auto [actor, critic, targets] = init_agent_networks(33, 1, 1, {1.0}, 8);
  Transition t = random_transition(rng, 1, 1);
  const Batch batch{t};
  const double gamma = 0.9;
  const double y = bellman_target(t, targets, gamma);

  // expected gradient: backprop of (Q - y)^2
  ForwardCache cache;
  Vec scratch;
  CriticNet critic_copy = critic;
  const double q = critic_forward(critic_copy, t.state, t.action, cache, scratch);
  const BackwardResult expected =
      mlp_backward(critic_copy.params, cache, {2.0 * (q - y)});

  // finite differences on the loss
  auto loss_fn = [&](const NetParams& probe) {
    CriticNet c{probe};
    const double qq = critic_forward(c, t.state, t.action);
    return (qq - y) * (qq - y);
  };
  const NetParams numeric = finite_diff_grad(loss_fn, critic.params, 1e-5);
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < numeric.weights[l].size(); ++i) {
      const double fd = numeric.weights[l].data[i];
      if (std::abs(fd) <= 1e-8) continue;
      EXPECT_LT(std::abs(expected.param_grads.weights[l].data[i] - fd) / std::abs(fd),
                1e-5);
    }
  }

  // critic_update must equal adam_step applied to that gradient
  AdamState adam = make_adam(critic.params, 1e-3);
  auto [manual_params, manual_state] =
      adam_step(critic.params, expected.param_grads, make_adam(critic.params, 1e-3));
  const double loss = critic_update(critic, batch, targets, gamma, adam);
  EXPECT_NEAR(loss, (q - y) * (q - y), 1e-15);
  EXPECT_TRUE(params_bit_equal(critic.params, manual_params));
}

TEST(CriticUpdate, AliasedTargetsReduceToVanillaBellmanLoss) {
  // with targets aliased to the live nets the loss equals the direct
  // (Q(x,u) - γQ(x',π(x')) - R)² expression computed with live nets
  Rng rng(101);
  auto [actor, critic, targets] = init_agent_networks(44, 2, 1, {1.0}, 8,
                                                      TargetMode::none());
  Batch batch;
  for (int i = 0; i < 16; ++i) batch.push_back(random_transition(rng, 2, 1));

  copy_targets(targets, actor, critic);  // alias
  const double gamma = 0.95;
  double direct = 0.0;
  for (const Transition& t : batch) {
    const Vec next_a = actor_forward(actor, t.next_state);
    const double q_next = critic_forward(critic, t.next_state, next_a);
    const double q = critic_forward(critic, t.state, t.action);
    const double residual = q - gamma * q_next - t.cost;
    direct += residual * residual / batch.size();
  }
  AdamState adam = make_adam(critic.params, 1e-3);
  const double loss = critic_update(critic, batch, targets, gamma, adam);
  EXPECT_NEAR(loss, direct, 1e-12);
}

TEST(CriticUpdate, EmptyBatchRejected) {
  CriticNet critic = constant_critic(2, 0.0);
  TargetPair targets;
  targets.actor = ActorNet{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  targets.critic = constant_critic(2, 0.0);
  AdamState adam = make_adam(critic.params, 1e-3);
  EXPECT_THROW(critic_update(critic, {}, targets, 0.99, adam), ContractError);
}

TEST(ActorGradient, Theorem1LinearDeltaEqualsQBranchExactly) {
  // the TD(linear) branch gradient is elementwise equal to the Q branch
  Rng rng(31415);
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t state_dim = 1 + draw % 2;
    auto [actor, critic, targets] =
        init_agent_networks(9000 + draw, state_dim, 1, {1.5}, 8);
    Batch batch;
    for (int i = 0; i < 16; ++i) batch.push_back(random_transition(rng, state_dim, 1));
    const PhaseSchedule sched{PhaseKind::linear, 100};
    const NetParams g_q =
        actor_gradient(ActorGradMode{ActorMode::q_only, TdForm::linear_delta}, sched,
                       50, 0.3, batch, critic, actor, targets, 0.99);
    const NetParams g_td =
        actor_gradient(ActorGradMode{ActorMode::td_only, TdForm::linear_delta}, sched,
                       50, 0.3, batch, critic, actor, targets, 0.99);
    for (int l = 0; l < 3; ++l) {
      for (std::size_t i = 0; i < g_q.weights[l].size(); ++i) {
        ASSERT_LE(std::abs(g_q.weights[l].data[i] - g_td.weights[l].data[i]), 1e-12);
      }
      for (std::size_t i = 0; i < g_q.biases[l].size(); ++i) {
        ASSERT_LE(std::abs(g_q.biases[l][i] - g_td.biases[l][i]), 1e-12);
      }
    }
  }
}

TEST(ActorGradient, SquaredDeltaZeroResidualGivesZeroGradient) {
  // critic constant 1, target critic constant 0, R = 1 -> δ = 0 everywhere
  CriticNet critic = constant_critic(2, 1.0);
  ActorNet actor{make_net(1, 4, 4, 1, Activation::relu_relu_tanh), {1.0}};
  TargetPair targets;
  targets.actor = actor;
  targets.critic = constant_critic(2, 0.0);
  targets.mode = TargetMode::none();
  Batch batch;
  Rng rng(77);
  for (int i = 0; i < 8; ++i) {
    Transition t = random_transition(rng, 1, 1);
    t.cost = 1.0;
    batch.push_back(t);
  }
  const PhaseSchedule sched{PhaseKind::linear, 100};
  const NetParams g =
      actor_gradient(ActorGradMode{ActorMode::td_only, TdForm::squared_delta}, sched, 0,
                     0.0, batch, critic, actor, targets, 0.99);
  for (int l = 0; l < 3; ++l) {
    for (double v : g.weights[l].data) EXPECT_EQ(v, 0.0);
    for (double v : g.biases[l]) EXPECT_EQ(v, 0.0);
  }
}

TEST(ActorGradient, QBranchMatchesFiniteDifferences) {
  Rng rng(271);
  auto [actor, critic, targets] = init_agent_networks(606, 2, 1, {1.5}, 8);
  Batch batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_transition(rng, 2, 1));
  const PhaseSchedule sched{PhaseKind::linear, 100};
  const NetParams analytic =
      actor_gradient(ActorGradMode{ActorMode::q_only, TdForm::linear_delta}, sched, 0,
                     0.0, batch, critic, actor, targets, 0.99);
  auto objective = [&](const NetParams& probe) {
    ActorNet a{probe, actor.action_bound};
    double acc = 0.0;
    for (const Transition& t : batch) {
      const Vec u = actor_forward(a, t.state);
      acc += critic_forward(critic, t.state, u) / batch.size();
    }
    return acc;
  };
  const NetParams numeric = finite_diff_grad(objective, actor.params, 1e-5);
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < numeric.weights[l].size(); ++i) {
      const double fd = numeric.weights[l].data[i];
      if (std::abs(fd) <= 1e-8) continue;
      EXPECT_LT(std::abs(analytic.weights[l].data[i] - fd) / std::abs(fd), 1e-5)
          << "layer " << l << " weight " << i;
    }
    for (std::size_t i = 0; i < numeric.biases[l].size(); ++i) {
      const double fd = numeric.biases[l][i];
      if (std::abs(fd) <= 1e-8) continue;
      EXPECT_LT(std::abs(analytic.biases[l][i] - fd) / std::abs(fd), 1e-5);
    }
  }
}

TEST(ActorGradient, PhasedModeFollowsOmegaAgainstSchedule) {
  Rng rng(515);
  auto [actor, critic, targets] = init_agent_networks(515, 1, 1, {1.0}, 8);
  Batch batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_transition(rng, 1, 1));
  const PhaseSchedule sched{PhaseKind::linear, 100};
  // at k=0 M=1: any omega picks the Q branch
  const NetParams phased =
      actor_gradient(ActorGradMode{ActorMode::phased, TdForm::squared_delta}, sched, 0,
                     0.99, batch, critic, actor, targets, 0.99);
  const NetParams q_only =
      actor_gradient(ActorGradMode{ActorMode::q_only, TdForm::squared_delta}, sched, 0,
                     0.99, batch, critic, actor, targets, 0.99);
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(phased.weights[l].data, q_only.weights[l].data);
  }
  // at k=100 M=0: any omega > 0 picks the TD branch
  const NetParams phased_td =
      actor_gradient(ActorGradMode{ActorMode::phased, TdForm::squared_delta}, sched, 100,
                     0.5, batch, critic, actor, targets, 0.99);
  const NetParams td_only =
      actor_gradient(ActorGradMode{ActorMode::td_only, TdForm::squared_delta}, sched, 100,
                     0.5, batch, critic, actor, targets, 0.99);
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(phased_td.weights[l].data, td_only.weights[l].data);
  }
}

TEST(ActorUpdate, ZeroGradientLeavesActorUnchanged) {
  auto [actor, critic, targets] = init_agent_networks(404, 1, 1, {1.0}, 8);
  const NetParams before = actor.params;
  AdamState adam = make_adam(actor.params, 1e-3);
  actor_update(actor, zeros_like(actor.params), adam);
  EXPECT_TRUE(params_bit_equal(actor.params, before));
}

TEST(ActorUpdate, DelegatesToAdamStep) {
  Rng rng(21);
  auto [actor, critic, targets] = init_agent_networks(42, 1, 1, {1.0}, 8);
  NetParams grad = zeros_like(actor.params);
  for (int l = 0; l < 3; ++l) {
    for (double& v : grad.weights[l].data) v = rng.uniform(-1, 1);
  }
  auto [manual, manual_state] =
      adam_step(actor.params, grad, make_adam(actor.params, 1e-3));
  AdamState adam = make_adam(actor.params, 1e-3);
  actor_update(actor, grad, adam);
  EXPECT_TRUE(params_bit_equal(actor.params, manual));
}

TEST(ActorUpdate, RepeatedStepsDescendQuadraticSurrogate) {
  // surrogate f(w) = (w - 3)^2 on a single scalar parameter
  NetParams p = make_net(1, 1, 1, 1, Activation::relu_relu_linear);
  AdamState adam = make_adam(p, 0.05);
  ActorNet actor{p, {1.0}};
  auto value = [&]() {
    const double w = actor.params.weights[2].data[0];
    return (w - 3.0) * (w - 3.0);
  };
  double prev = value();
  double last = prev;
  for (int i = 0; i < 500; ++i) {
    NetParams g = zeros_like(actor.params);
    g.weights[2].data[0] = 2.0 * (actor.params.weights[2].data[0] - 3.0);
    actor_update(actor, g, adam);
    last = value();
  }
  EXPECT_LT(last, prev);
  EXPECT_NEAR(actor.params.weights[2].data[0], 3.0, 0.1);
}
