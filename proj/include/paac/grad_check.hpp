#pragma once

#include <functional>

#include "paac/mlp.hpp"

namespace paac {

// Central-difference gradient of a scalar function of the parameters,
// evaluated entry by entry. Intended as a testing oracle; f must be pure.
inline NetParams finite_diff_grad(const std::function<double(const NetParams&)>& f,
                                  const NetParams& params, double eps) {
  NetParams grads = zeros_like(params);
  NetParams probe = params;
  auto central = [&](double& slot, double& out) {
    const double saved = slot;
    slot = saved + eps;
    const double plus = f(probe);
    slot = saved - eps;
    const double minus = f(probe);
    slot = saved;
    out = (plus - minus) / (2.0 * eps);
  };
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < probe.weights[l].size(); ++i) {
      central(probe.weights[l].data[i], grads.weights[l].data[i]);
    }
    for (std::size_t i = 0; i < probe.biases[l].size(); ++i) {
      central(probe.biases[l][i], grads.biases[l][i]);
    }
  }
  return grads;
}

}  // namespace paac
