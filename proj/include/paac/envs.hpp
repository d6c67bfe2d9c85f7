#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "paac/common.hpp"
#include "paac/linalg.hpp"
#include "paac/rng.hpp"

namespace paac {

enum class EnvKind { lqr, cartpole_balance, pendulum_swingup };

// x' = A x + B u with stage cost xᵀ Qc x + uᵀ Rc u. Initial states are
// drawn uniformly from the per-dimension box [x0_lo, x0_hi].
struct LqrModel {
  DenseMatrix A, B, Qc, Rc;
  Vec x0_lo, x0_hi;
};

// Continuous-force cart-pole, balance task. State vector observed as
// [x, x_dot, cos(theta), sin(theta), theta_dot] with theta = 0 upright.
struct CartpoleModel {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_len = 0.5;
  double gravity = 9.81;
  double dt = 0.02;
  double x_limit = 2.4;
  double init_range = 0.05;
};

// Torque-limited pendulum, swing-up task. Observed as
// [cos(theta), sin(theta), theta_dot], theta = 0 upright.
struct PendulumModel {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double dt = 0.02;
  double max_speed = 8.0;
  double init_angle_range = 0.1;  // around hanging-down
  double init_speed_range = 0.05;
};

struct EnvSpec {
  EnvKind kind = EnvKind::lqr;
  std::size_t state_dim = 1;
  std::size_t action_dim = 1;
  Vec action_bound;
  std::size_t episode_len = 100;
  bool cost_normalized = false;
  std::string name;
  LqrModel lqr;
  CartpoleModel cartpole;
  PendulumModel pendulum;
};

struct StepResult {
  Vec next_state;
  double cost = 0.0;
  bool terminal = false;
};

// -------- presets --------

inline EnvSpec make_lqr1d() {
  EnvSpec s;
  s.kind = EnvKind::lqr;
  s.name = "lqr1d";
  s.state_dim = 1;
  s.action_dim = 1;
  s.action_bound = {2.0};
  s.episode_len = 100;
  s.cost_normalized = false;
  s.lqr.A = DenseMatrix(1, 1, {1.0});
  s.lqr.B = DenseMatrix(1, 1, {1.0});
  s.lqr.Qc = DenseMatrix(1, 1, {1.0});
  s.lqr.Rc = DenseMatrix(1, 1, {1.0});
  s.lqr.x0_lo = {-1.0};
  s.lqr.x0_hi = {1.0};
  return s;
}

inline EnvSpec make_lqr2d() {
  EnvSpec s;
  s.kind = EnvKind::lqr;
  s.name = "lqr2d";
  s.state_dim = 2;
  s.action_dim = 1;
  s.action_bound = {3.0};
  s.episode_len = 200;
  s.cost_normalized = false;
  // double integrator, dt = 0.1
  s.lqr.A = DenseMatrix(2, 2, {1.0, 0.1, 0.0, 1.0});
  s.lqr.B = DenseMatrix(2, 1, {0.005, 0.1});
  s.lqr.Qc = DenseMatrix(2, 2, {1.0, 0.0, 0.0, 0.1});
  s.lqr.Rc = DenseMatrix(1, 1, {0.1});
  s.lqr.x0_lo = {-1.0, -1.0};
  s.lqr.x0_hi = {1.0, 1.0};
  return s;
}

inline EnvSpec make_cartpole() {
  EnvSpec s;
  s.kind = EnvKind::cartpole_balance;
  s.name = "cartpole";
  s.state_dim = 5;
  s.action_dim = 1;
  s.action_bound = {10.0};
  s.episode_len = 1000;
  s.cost_normalized = true;
  return s;
}

inline EnvSpec make_pendulum() {
  EnvSpec s;
  s.kind = EnvKind::pendulum_swingup;
  s.name = "pendulum";
  s.state_dim = 3;
  s.action_dim = 1;
  s.action_bound = {6.0};
  s.episode_len = 1000;
  s.cost_normalized = true;
  return s;
}

inline EnvSpec env_preset(const std::string& name) {
  if (name == "lqr1d") return make_lqr1d();
  if (name == "lqr2d") return make_lqr2d();
  if (name == "cartpole") return make_cartpole();
  if (name == "pendulum") return make_pendulum();
  throw ConfigError("env_preset: unknown environment '" + name + "'");
}

// -------- reset / step --------

inline Vec env_reset(const EnvSpec& spec, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xE27ULL));
  switch (spec.kind) {
    case EnvKind::lqr: {
      Vec x(spec.state_dim);
      for (std::size_t i = 0; i < spec.state_dim; ++i) {
        x[i] = rng.uniform(spec.lqr.x0_lo[i], spec.lqr.x0_hi[i]);
      }
      return x;
    }
    case EnvKind::cartpole_balance: {
      const double r = spec.cartpole.init_range;
      const double x = rng.uniform(-r, r);
      const double x_dot = rng.uniform(-r, r);
      const double theta = rng.uniform(-r, r);
      const double theta_dot = rng.uniform(-r, r);
      return {x, x_dot, std::cos(theta), std::sin(theta), theta_dot};
    }
    case EnvKind::pendulum_swingup: {
      const double theta =
          std::numbers::pi + rng.uniform(-spec.pendulum.init_angle_range,
                                         spec.pendulum.init_angle_range);
      const double theta_dot =
          rng.uniform(-spec.pendulum.init_speed_range, spec.pendulum.init_speed_range);
      return {std::cos(theta), std::sin(theta), theta_dot};
    }
  }
  throw ContractError("env_reset: unreachable");
}

namespace detail {

inline double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

inline StepResult lqr_step(const EnvSpec& spec, const Vec& state, const Vec& action) {
  StepResult r;
  r.next_state = matvec(spec.lqr.A, state);
  const Vec bu = matvec(spec.lqr.B, action);
  for (std::size_t i = 0; i < r.next_state.size(); ++i) r.next_state[i] += bu[i];
  r.cost = quadratic_form(state, spec.lqr.Qc, state) +
           quadratic_form(action, spec.lqr.Rc, action);
  return r;
}

inline StepResult cartpole_step(const EnvSpec& spec, const Vec& state, const Vec& action) {
  const CartpoleModel& m = spec.cartpole;
  const double u = clamp(action[0], -spec.action_bound[0], spec.action_bound[0]);
  double x = state[0];
  double x_dot = state[1];
  double theta = std::atan2(state[3], state[2]);
  double theta_dot = state[4];

  const double total_mass = m.cart_mass + m.pole_mass;
  const double polemass_len = m.pole_mass * m.pole_half_len;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (u + polemass_len * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc =
      (m.gravity * sin_t - cos_t * temp) /
      (m.pole_half_len * (4.0 / 3.0 - m.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - polemass_len * theta_acc * cos_t / total_mass;

  // stage cost at the pre-step (state, action)
  const double upright = (1.0 - cos_t) / 2.0;                      // 0 upright, 1 down
  const double centered = std::min(std::abs(x) / m.x_limit, 1.0);  // 0 centered
  const double effort = (u / spec.action_bound[0]) * (u / spec.action_bound[0]);

  // semi-implicit Euler: velocities first, then positions
  x_dot += m.dt * x_acc;
  theta_dot += m.dt * theta_acc;
  x += m.dt * x_dot;
  theta += m.dt * theta_dot;

  StepResult r;
  r.next_state = {x, x_dot, std::cos(theta), std::sin(theta), theta_dot};
  r.cost = 0.7 * upright + 0.15 * centered + 0.15 * effort;
  return r;
}

inline StepResult pendulum_step(const EnvSpec& spec, const Vec& state, const Vec& action) {
  const PendulumModel& m = spec.pendulum;
  const double u = clamp(action[0], -spec.action_bound[0], spec.action_bound[0]);
  double theta = std::atan2(state[1], state[0]);
  double theta_dot = state[2];

  // stage cost at the pre-step (state, action); each term is held in [0,1]
  const double upright = (1.0 - std::cos(theta)) / 2.0;
  const double spin_frac = std::min(std::abs(theta_dot) / m.max_speed, 1.0);
  const double effort = (u / spec.action_bound[0]) * (u / spec.action_bound[0]);
  const double cost = 0.8 * upright + 0.1 * spin_frac * spin_frac + 0.1 * effort;

  const double theta_acc = 3.0 * m.gravity / (2.0 * m.length) * std::sin(theta) +
                           3.0 * u / (m.mass * m.length * m.length);
  theta_dot = clamp(theta_dot + m.dt * theta_acc, -m.max_speed, m.max_speed);
  theta += m.dt * theta_dot;

  StepResult r;
  r.next_state = {std::cos(theta), std::sin(theta), theta_dot};
  r.cost = cost;
  return r;
}

}  // namespace detail

inline StepResult env_step(const EnvSpec& spec, const Vec& state, const Vec& action) {
  require_dim(state, spec.state_dim, "env_step: state");
  require_dim(action, spec.action_dim, "env_step: action");
  StepResult r;
  switch (spec.kind) {
    case EnvKind::lqr:
      r = detail::lqr_step(spec, state, action);
      break;
    case EnvKind::cartpole_balance:
      r = detail::cartpole_step(spec, state, action);
      break;
    case EnvKind::pendulum_swingup:
      r = detail::pendulum_step(spec, state, action);
      break;
  }
  if (!all_finite(r.next_state) || !std::isfinite(r.cost)) {
    throw NumericError("env_step: state diverged to a non-finite value");
  }
  return r;
}

// Total cost of rolling the zero policy from a fixed start; the AUC
// normalizer for LQR presets uses this from the worst-corner start.
inline double zero_policy_cost(const EnvSpec& spec, const Vec& x0, std::size_t steps) {
  Vec x = x0;
  const Vec u(spec.action_dim, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    StepResult r = env_step(spec, x, u);
    total += r.cost;
    x = std::move(r.next_state);
  }
  return total;
}

inline Vec lqr_worst_corner(const EnvSpec& spec) {
  Vec x(spec.state_dim);
  for (std::size_t i = 0; i < spec.state_dim; ++i) {
    x[i] = std::abs(spec.lqr.x0_lo[i]) > std::abs(spec.lqr.x0_hi[i]) ? spec.lqr.x0_lo[i]
                                                                     : spec.lqr.x0_hi[i];
  }
  return x;
}

// -------- discounted Riccati oracle --------

struct RiccatiSolution {
  DenseMatrix P;  // optimal quadratic cost-to-go, V*(x) = xᵀ P x
  DenseMatrix K;  // optimal gain, u* = -K x
  double residual = 0.0;
  std::size_t iterations = 0;
};

// Fixed-point iteration of the discounted discrete algebraic Riccati map
//   P <- Qc + γ AᵀPA - γ² AᵀPB (Rc + γ BᵀPB)⁻¹ BᵀPA
// with K = γ (Rc + γ BᵀPB)⁻¹ BᵀPA.
inline RiccatiSolution riccati_solve(const LqrModel& model, double gamma, double tol,
                                     std::size_t max_iters = 100000) {
  const DenseMatrix At = transpose(model.A);
  const DenseMatrix Bt = transpose(model.B);
  DenseMatrix P = model.Qc;
  RiccatiSolution sol;
  for (std::size_t iter = 1; iter <= max_iters; ++iter) {
    const DenseMatrix PA = matmul(P, model.A);
    const DenseMatrix PB = matmul(P, model.B);
    const DenseMatrix gain_lhs = add(model.Rc, scale(matmul(Bt, PB), gamma));
    const DenseMatrix gain_rhs = matmul(Bt, PA);
    const DenseMatrix K = scale(solve(gain_lhs, gain_rhs), gamma);
    DenseMatrix next = add(model.Qc, scale(matmul(At, PA), gamma));
    next = sub(next, scale(matmul(matmul(At, PB), K), gamma));
    const double diff = inf_norm(sub(next, P));
    P = next;
    if (diff < tol) {
      sol.P = P;
      sol.K = K;
      sol.iterations = iter;
      // residual of the fixed point at the returned P
      const DenseMatrix PA2 = matmul(P, model.A);
      const DenseMatrix PB2 = matmul(P, model.B);
      const DenseMatrix lhs2 = add(model.Rc, scale(matmul(Bt, PB2), gamma));
      const DenseMatrix K2 = scale(solve(lhs2, matmul(Bt, PA2)), gamma);
      DenseMatrix rhs = add(model.Qc, scale(matmul(At, PA2), gamma));
      rhs = sub(rhs, scale(matmul(matmul(At, PB2), K2), gamma));
      sol.residual = inf_norm(sub(rhs, P));
      sol.K = K2;
      return sol;
    }
  }
  throw OracleError("riccati_solve: no convergence within max_iters");
}

// Q*(x,u) = xᵀQc x + uᵀRc u + γ (Ax+Bu)ᵀ P (Ax+Bu)
inline double lqr_q_star(const RiccatiSolution& sol, const LqrModel& model, double gamma,
                         const Vec& x, const Vec& u) {
  Vec next = matvec(model.A, x);
  const Vec bu = matvec(model.B, u);
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += bu[i];
  return quadratic_form(x, model.Qc, x) + quadratic_form(u, model.Rc, u) +
         gamma * quadratic_form(next, sol.P, next);
}

// -------- tabular value-iteration oracle --------

// Cartesian grid over a compact state box and action box; next states snap
// to the nearest grid point (clamped into the box).
struct GridSpec {
  Vec state_lo, state_hi;
  std::size_t cells_per_dim = 41;
  Vec action_lo, action_hi;
  std::size_t action_cells = 21;
};

class ValueIterationOracle {
 public:
  ValueIterationOracle(const EnvSpec& spec, const GridSpec& grid) : spec_(spec), grid_(grid) {
    if (spec.kind != EnvKind::lqr) {
      throw ContractError("ValueIterationOracle: LQR environments only");
    }
    build_tables();
  }

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double r_max() const { return r_max_; }

  // Runs `iters` Bellman-optimality sweeps from Q_0 = 0 and returns the
  // whole sequence Q_0 ... Q_iters (as flat [state*n_actions + action]).
  std::vector<std::vector<double>> run(double gamma, std::size_t iters) const {
    std::vector<std::vector<double>> seq;
    seq.reserve(iters + 1);
    seq.emplace_back(n_states_ * n_actions_, 0.0);
    for (std::size_t i = 0; i < iters; ++i) {
      const std::vector<double>& prev = seq.back();
      // min over actions per state, computed once
      std::vector<double> min_prev(n_states_);
      for (std::size_t s = 0; s < n_states_; ++s) {
        double best = prev[s * n_actions_];
        for (std::size_t a = 1; a < n_actions_; ++a) {
          best = std::min(best, prev[s * n_actions_ + a]);
        }
        min_prev[s] = best;
      }
      std::vector<double> next(n_states_ * n_actions_);
      for (std::size_t s = 0; s < n_states_; ++s) {
        for (std::size_t a = 0; a < n_actions_; ++a) {
          const std::size_t idx = s * n_actions_ + a;
          next[idx] = stage_cost_[idx] + gamma * min_prev[next_state_[idx]];
        }
      }
      seq.push_back(std::move(next));
    }
    return seq;
  }

  Vec state_at(std::size_t s) const {
    Vec x(spec_.state_dim);
    std::size_t rem = s;
    for (std::size_t d = 0; d < spec_.state_dim; ++d) {
      const std::size_t cell = rem % grid_.cells_per_dim;
      rem /= grid_.cells_per_dim;
      x[d] = coord(grid_.state_lo[d], grid_.state_hi[d], grid_.cells_per_dim, cell);
    }
    return x;
  }

  Vec action_at(std::size_t a) const {
    Vec u(spec_.action_dim);
    std::size_t rem = a;
    for (std::size_t d = 0; d < spec_.action_dim; ++d) {
      const std::size_t cell = rem % grid_.action_cells;
      rem /= grid_.action_cells;
      u[d] = coord(grid_.action_lo[d], grid_.action_hi[d], grid_.action_cells, cell);
    }
    return u;
  }

  // Greedy action index per state from a converged table.
  std::vector<std::size_t> greedy_actions(const std::vector<double>& q) const {
    std::vector<std::size_t> greedy(n_states_);
    for (std::size_t s = 0; s < n_states_; ++s) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < n_actions_; ++a) {
        if (q[s * n_actions_ + a] < q[s * n_actions_ + best]) best = a;
      }
      greedy[s] = best;
    }
    return greedy;
  }

 private:
  static double coord(double lo, double hi, std::size_t cells, std::size_t cell) {
    if (cells == 1) return (lo + hi) / 2.0;
    return lo + (hi - lo) * static_cast<double>(cell) / static_cast<double>(cells - 1);
  }

  std::size_t snap(double v, double lo, double hi, std::size_t cells) const {
    if (cells == 1) return 0;
    const double clamped = detail::clamp(v, lo, hi);
    const double t = (clamped - lo) / (hi - lo) * static_cast<double>(cells - 1);
    return static_cast<std::size_t>(std::lround(t));
  }

  void build_tables() {
    n_states_ = 1;
    for (std::size_t d = 0; d < spec_.state_dim; ++d) n_states_ *= grid_.cells_per_dim;
    n_actions_ = 1;
    for (std::size_t d = 0; d < spec_.action_dim; ++d) n_actions_ *= grid_.action_cells;
    stage_cost_.resize(n_states_ * n_actions_);
    next_state_.resize(n_states_ * n_actions_);
    r_max_ = 0.0;
    for (std::size_t s = 0; s < n_states_; ++s) {
      const Vec x = state_at(s);
      for (std::size_t a = 0; a < n_actions_; ++a) {
        const Vec u = action_at(a);
        const StepResult r = env_step(spec_, x, u);
        const std::size_t idx = s * n_actions_ + a;
        stage_cost_[idx] = r.cost;
        r_max_ = std::max(r_max_, r.cost);
        std::size_t sn = 0;
        std::size_t stride = 1;
        for (std::size_t d = 0; d < spec_.state_dim; ++d) {
          sn += stride * snap(r.next_state[d], grid_.state_lo[d], grid_.state_hi[d],
                              grid_.cells_per_dim);
          stride *= grid_.cells_per_dim;
        }
        next_state_[idx] = sn;
      }
    }
  }

  EnvSpec spec_;
  GridSpec grid_;
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> stage_cost_;
  std::vector<std::size_t> next_state_;
  double r_max_ = 0.0;
};

}  // namespace paac
