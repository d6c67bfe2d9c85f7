#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "paac/common.hpp"
#include "paac/envs.hpp"
#include "paac/grad_check.hpp"
#include "paac/mlp.hpp"
#include "paac/networks.hpp"
#include "paac/paac.hpp"
#include "paac/phase.hpp"
#include "paac/rng.hpp"

namespace paac {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Backprop implementation under test; swappable so a test can feed a
// deliberately corrupted gradient through the same suite.
using BackwardFn =
    std::function<NetParams(const NetParams&, const ForwardCache&, const Vec&)>;

inline NetParams default_backward(const NetParams& p, const ForwardCache& cache,
                                  const Vec& upstream) {
  return mlp_backward(p, cache, upstream).param_grads;
}

// Backprop vs central finite differences over small random nets of both
// activation flavors.
inline SuiteResult check_gradients(std::size_t n_nets = 50,
                                   const BackwardFn& backward = default_backward) {
  SuiteResult res{"gradient-check", true, ""};
  Rng rng(12345);
  const double eps = 1e-5;
  for (std::size_t trial = 0; trial < n_nets; ++trial) {
    const Activation act = (trial % 2 == 0) ? Activation::relu_relu_linear
                                            : Activation::relu_relu_tanh;
    const std::size_t in = 2 + trial % 3;
    const std::size_t out = 1 + trial % 2;
    NetParams p = init_params(rng, in, 8, out, act);
    Vec input(in);
    for (double& v : input) v = rng.uniform(-1.0, 1.0);
    Vec upstream(out);
    for (double& v : upstream) v = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    mlp_forward(p, input, cache);
    const NetParams analytic = backward(p, cache, upstream);
    auto f = [&](const NetParams& probe) {
      const Vec y = mlp_forward(probe, input);
      double acc = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * upstream[i];
      return acc;
    };
    const NetParams numeric = finite_diff_grad(f, p, eps);
    for (int l = 0; l < 3 && res.pass; ++l) {
      auto compare = [&](double a, double n) {
        if (std::abs(n) <= 1e-8) return true;  // below the trust floor
        return std::abs(a - n) / std::abs(n) < 1e-5;
      };
      for (std::size_t i = 0; i < analytic.weights[l].size(); ++i) {
        if (!compare(analytic.weights[l].data[i], numeric.weights[l].data[i])) {
          res.pass = false;
          res.detail = "net " + std::to_string(trial) + " layer " + std::to_string(l) +
                       " weight " + std::to_string(i);
          break;
        }
      }
      for (std::size_t i = 0; res.pass && i < analytic.biases[l].size(); ++i) {
        if (!compare(analytic.biases[l][i], numeric.biases[l][i])) {
          res.pass = false;
          res.detail = "net " + std::to_string(trial) + " layer " + std::to_string(l) +
                       " bias " + std::to_string(i);
        }
      }
    }
    if (!res.pass) break;
  }
  return res;
}

// Exact elementwise equality of the TD(linear-delta) and Q actor-gradient
// branches over random nets and batches.
inline SuiteResult check_theorem1(std::size_t n_draws = 20, std::size_t batch_size = 32) {
  SuiteResult res{"theorem1-td-equals-q", true, ""};
  Rng rng(777);
  for (std::size_t draw = 0; draw < n_draws; ++draw) {
    const std::size_t state_dim = 1 + draw % 3;
    const std::size_t action_dim = 1 + draw % 2;
    const Vec bound(action_dim, 1.5);
    auto [actor, critic, targets] =
        init_agent_networks(1000 + draw, state_dim, action_dim, bound, 16);
    Batch batch;
    for (std::size_t i = 0; i < batch_size; ++i) {
      Transition t;
      t.state.resize(state_dim);
      t.next_state.resize(state_dim);
      t.action.resize(action_dim);
      for (double& v : t.state) v = rng.uniform(-1.0, 1.0);
      for (double& v : t.next_state) v = rng.uniform(-1.0, 1.0);
      for (double& v : t.action) v = rng.uniform(-1.5, 1.5);
      t.cost = rng.uniform(0.0, 1.0);
      batch.push_back(std::move(t));
    }
    const PhaseSchedule sched{PhaseKind::linear, 100};
    const NetParams g_q =
        actor_gradient(ActorGradMode{ActorMode::q_only, TdForm::linear_delta}, sched, 0,
                       0.0, batch, critic, actor, targets, 0.99);
    const NetParams g_td =
        actor_gradient(ActorGradMode{ActorMode::td_only, TdForm::linear_delta}, sched, 0,
                       0.0, batch, critic, actor, targets, 0.99);
    for (int l = 0; l < 3; ++l) {
      for (std::size_t i = 0; i < g_q.weights[l].size(); ++i) {
        if (std::abs(g_q.weights[l].data[i] - g_td.weights[l].data[i]) > 1e-12) {
          res.pass = false;
          res.detail = "draw " + std::to_string(draw);
          return res;
        }
      }
      for (std::size_t i = 0; i < g_q.biases[l].size(); ++i) {
        if (std::abs(g_q.biases[l][i] - g_td.biases[l][i]) > 1e-12) {
          res.pass = false;
          res.detail = "draw " + std::to_string(draw);
          return res;
        }
      }
    }
  }
  return res;
}

// Endpoint and monotonicity properties of all three transition functions.
inline SuiteResult check_schedule(std::size_t grid_points = 10000) {
  SuiteResult res{"schedule-properties", true, ""};
  for (PhaseKind kind : {PhaseKind::linear, PhaseKind::quadratic, PhaseKind::hard_switch}) {
    const PhaseSchedule s{kind, grid_points};
    if (phase_value(s, 0) != 1.0 || phase_value(s, s.k_total) != 0.0) {
      res.pass = false;
      res.detail = "endpoint violation";
      return res;
    }
    double prev = phase_value(s, 0);
    for (std::size_t k = 1; k <= s.k_total; ++k) {
      const double cur = phase_value(s, k);
      if (cur > prev + 1e-15) {
        res.pass = false;
        res.detail = "monotonicity violation at k=" + std::to_string(k);
        return res;
      }
      prev = cur;
    }
  }
  return res;
}

// Tabular value-iteration monotonicity and boundedness on the scalar LQR
// grid (Q_0 = 0).
inline SuiteResult check_value_iteration(std::size_t iters = 100) {
  SuiteResult res{"value-iteration-monotone", true, ""};
  const EnvSpec env = make_lqr1d();
  GridSpec grid;
  grid.state_lo = {-2.0};
  grid.state_hi = {2.0};
  grid.cells_per_dim = 41;
  grid.action_lo = {-2.0};
  grid.action_hi = {2.0};
  grid.action_cells = 21;
  const double gamma = 0.95;
  const ValueIterationOracle oracle(env, grid);
  const auto seq = oracle.run(gamma, iters);
  const double bound = oracle.r_max() / (1.0 - gamma) + 1e-9;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    for (std::size_t c = 0; c < seq[i].size(); ++c) {
      if (seq[i][c] > seq[i + 1][c] + 1e-12) {
        res.pass = false;
        res.detail = "monotonicity violated at sweep " + std::to_string(i);
        return res;
      }
      if (seq[i + 1][c] > bound) {
        res.pass = false;
        res.detail = "upper bound violated at sweep " + std::to_string(i);
        return res;
      }
    }
  }
  return res;
}

inline std::vector<SuiteResult> run_check_suites(const std::vector<std::string>& names) {
  std::vector<SuiteResult> results;
  for (const std::string& name : names) {
    if (name == "gradient") {
      results.push_back(check_gradients());
    } else if (name == "theorem1") {
      results.push_back(check_theorem1());
    } else if (name == "schedule") {
      results.push_back(check_schedule());
    } else if (name == "value_iteration") {
      results.push_back(check_value_iteration());
    } else {
      throw ConfigError("unknown check suite '" + name + "'");
    }
  }
  return results;
}

inline std::vector<std::string> all_check_suites() {
  return {"gradient", "theorem1", "schedule", "value_iteration"};
}

}  // namespace paac
