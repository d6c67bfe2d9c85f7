#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "paac/common.hpp"
#include "paac/mlp.hpp"

namespace paac {

// Adam with bias correction, tracking moments shaped like the parameters.
struct AdamState {
  NetParams first_moment;
  NetParams second_moment;
  std::size_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline AdamState make_adam(const NetParams& like, double lr) {
  AdamState s;
  s.first_moment = zeros_like(like);
  s.second_moment = zeros_like(like);
  s.lr = lr;
  return s;
}

namespace detail {

inline void adam_update_block(Vec& params, const Vec& grads, Vec& m, Vec& v,
                              double lr_hat, double beta1, double beta2,
                              double eps_hat, int layer, const char* block) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g)) {
      throw NumericError("adam_step: non-finite gradient in layer " +
                         std::to_string(layer) + " (" + block + ")");
    }
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    params[i] -= lr_hat * m[i] / (std::sqrt(v[i]) + eps_hat);
  }
}

}  // namespace detail

// One descent step. The bias correction is folded into the step size and
// epsilon the way the original paper suggests:
//   lr_hat = lr * sqrt(1-beta2^t) / (1-beta1^t),  eps_hat = eps * sqrt(1-beta2^t)
// which is algebraically identical to correcting the moments directly.
inline void adam_step_inplace(NetParams& params, const NetParams& grads, AdamState& state) {
  require_same_layout(params, grads, "adam_step");
  require_same_layout(params, state.first_moment, "adam_step");
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias2 = std::sqrt(1.0 - std::pow(state.beta2, t));
  const double lr_hat = state.lr * bias2 / (1.0 - std::pow(state.beta1, t));
  const double eps_hat = state.epsilon * bias2;
  for (int l = 0; l < 3; ++l) {
    detail::adam_update_block(params.weights[l].data, grads.weights[l].data,
                              state.first_moment.weights[l].data,
                              state.second_moment.weights[l].data, lr_hat,
                              state.beta1, state.beta2, eps_hat, l, "weights");
    detail::adam_update_block(params.biases[l], grads.biases[l],
                              state.first_moment.biases[l],
                              state.second_moment.biases[l], lr_hat, state.beta1,
                              state.beta2, eps_hat, l, "biases");
  }
}

inline std::pair<NetParams, AdamState> adam_step(NetParams params, const NetParams& grads,
                                                 AdamState state) {
  adam_step_inplace(params, grads, state);
  return {std::move(params), std::move(state)};
}

}  // namespace paac
