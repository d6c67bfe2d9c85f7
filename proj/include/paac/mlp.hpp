#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "paac/common.hpp"
#include "paac/linalg.hpp"
#include "paac/rng.hpp"

namespace paac {

// Output activation of the fixed ReLU-ReLU-<out> stack: tanh for actors,
// identity for critics.
enum class Activation { relu_relu_tanh, relu_relu_linear };

inline const char* activation_name(Activation a) {
  return a == Activation::relu_relu_tanh ? "relu_relu_tanh" : "relu_relu_linear";
}

// Parameters of a two-hidden-layer MLP: weights[0] is in->h1, weights[1]
// h1->h2, weights[2] h2->out. Gradients and optimizer moments reuse this
// type since they are shaped identically.
struct NetParams {
  std::array<DenseMatrix, 3> weights;
  std::array<Vec, 3> biases;
  Activation activation = Activation::relu_relu_linear;

  std::size_t input_dim() const { return weights[0].cols; }
  std::size_t output_dim() const { return weights[2].rows; }
  std::size_t hidden_width() const { return weights[0].rows; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
  }

  void fill(double value) {
    for (auto& w : weights) std::fill(w.data.begin(), w.data.end(), value);
    for (auto& b : biases) std::fill(b.begin(), b.end(), value);
  }
};

inline NetParams make_net(std::size_t in, std::size_t h1, std::size_t h2,
                          std::size_t out, Activation act) {
  NetParams p;
  p.weights[0] = DenseMatrix(h1, in);
  p.weights[1] = DenseMatrix(h2, h1);
  p.weights[2] = DenseMatrix(out, h2);
  p.biases[0].assign(h1, 0.0);
  p.biases[1].assign(h2, 0.0);
  p.biases[2].assign(out, 0.0);
  p.activation = act;
  return p;
}

inline NetParams zeros_like(const NetParams& p) {
  NetParams z = p;
  z.fill(0.0);
  return z;
}

inline void require_same_layout(const NetParams& a, const NetParams& b,
                                const char* what) {
  for (int l = 0; l < 3; ++l) {
    if (a.weights[l].rows != b.weights[l].rows ||
        a.weights[l].cols != b.weights[l].cols ||
        a.biases[l].size() != b.biases[l].size()) {
      throw ShapeError(std::string(what) + ": parameter layout mismatch at layer " +
                       std::to_string(l));
    }
  }
}

// Seeded per-layer uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) initialization
// for both weights and biases.
inline NetParams init_params(Rng& rng, std::size_t in, std::size_t hidden,
                             std::size_t out, Activation act) {
  NetParams p = make_net(in, hidden, hidden, out, act);
  for (int l = 0; l < 3; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols));
    for (double& w : p.weights[l].data) w = rng.uniform(-bound, bound);
    for (double& b : p.biases[l]) b = rng.uniform(-bound, bound);
  }
  return p;
}

// Intermediate activations kept for the backward pass. pre[l] holds the
// affine output of layer l, post[l] the activated value.
struct ForwardCache {
  Vec input;
  std::array<Vec, 3> pre;
  std::array<Vec, 3> post;
};

namespace detail {

inline void affine_into(const DenseMatrix& w, const Vec& b, const Vec& x, Vec& z) {
  matvec_into(w, x, z);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += b[i];
}

inline void relu_into(const Vec& z, Vec& h) {
  h.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
}

}  // namespace detail

// Forward pass; output lands in cache.post[2].
inline void mlp_forward(const NetParams& p, const Vec& input, ForwardCache& cache) {
  if (input.size() != p.input_dim()) {
    throw ShapeError("mlp_forward: input length " + std::to_string(input.size()) +
                     " != " + std::to_string(p.input_dim()));
  }
  cache.input = input;
  detail::affine_into(p.weights[0], p.biases[0], cache.input, cache.pre[0]);
  detail::relu_into(cache.pre[0], cache.post[0]);
  detail::affine_into(p.weights[1], p.biases[1], cache.post[0], cache.pre[1]);
  detail::relu_into(cache.pre[1], cache.post[1]);
  detail::affine_into(p.weights[2], p.biases[2], cache.post[1], cache.pre[2]);
  cache.post[2] = cache.pre[2];
  if (p.activation == Activation::relu_relu_tanh) {
    for (double& v : cache.post[2]) v = std::tanh(v);
  }
}

inline Vec mlp_forward(const NetParams& p, const Vec& input) {
  ForwardCache cache;
  mlp_forward(p, input, cache);
  return cache.post[2];
}

// Reverse-mode gradients of (output . upstream) w.r.t. parameters and the
// input, scaled by `weight` and accumulated into `grads`. The caller zeroes
// `grads` (shaped like p) before the first sample of a batch. ReLU
// subgradient at 0 is 0.
inline void mlp_backward_accum(const NetParams& p, const ForwardCache& cache,
                               const Vec& upstream, double weight,
                               NetParams& grads, Vec* input_grad) {
  if (upstream.size() != p.output_dim()) {
    throw ShapeError("mlp_backward: upstream length " + std::to_string(upstream.size()) +
                     " != " + std::to_string(p.output_dim()));
  }
  if (cache.input.size() != p.input_dim() ||
      cache.post[1].size() != p.weights[2].cols) {
    throw ShapeError("mlp_backward: cache does not match params");
  }
  require_same_layout(p, grads, "mlp_backward");

  // delta3 = d(out.upstream)/d(pre3)
  Vec delta3(upstream.size());
  if (p.activation == Activation::relu_relu_tanh) {
    for (std::size_t i = 0; i < delta3.size(); ++i) {
      const double t = cache.post[2][i];
      delta3[i] = weight * upstream[i] * (1.0 - t * t);
    }
  } else {
    for (std::size_t i = 0; i < delta3.size(); ++i) delta3[i] = weight * upstream[i];
  }

  // layer 3 gradients
  {
    DenseMatrix& gw = grads.weights[2];
    const Vec& h2 = cache.post[1];
    for (std::size_t i = 0; i < gw.rows; ++i) {
      const double d = delta3[i];
      if (d == 0.0) continue;
      double* row = gw.data.data() + i * gw.cols;
      for (std::size_t j = 0; j < gw.cols; ++j) row[j] += d * h2[j];
    }
    for (std::size_t i = 0; i < delta3.size(); ++i) grads.biases[2][i] += delta3[i];
  }

  // delta2 = W3ᵀ delta3 * relu'(pre2)
  Vec delta2(p.weights[2].cols, 0.0);
  matvec_transpose_accum(p.weights[2], delta3, delta2);
  for (std::size_t i = 0; i < delta2.size(); ++i) {
    if (cache.pre[1][i] <= 0.0) delta2[i] = 0.0;
  }

  {
    DenseMatrix& gw = grads.weights[1];
    const Vec& h1 = cache.post[0];
    for (std::size_t i = 0; i < gw.rows; ++i) {
      const double d = delta2[i];
      if (d == 0.0) continue;
      double* row = gw.data.data() + i * gw.cols;
      for (std::size_t j = 0; j < gw.cols; ++j) row[j] += d * h1[j];
    }
    for (std::size_t i = 0; i < delta2.size(); ++i) grads.biases[1][i] += delta2[i];
  }

  // delta1 = W2ᵀ delta2 * relu'(pre1)
  Vec delta1(p.weights[1].cols, 0.0);
  matvec_transpose_accum(p.weights[1], delta2, delta1);
  for (std::size_t i = 0; i < delta1.size(); ++i) {
    if (cache.pre[0][i] <= 0.0) delta1[i] = 0.0;
  }

  {
    DenseMatrix& gw = grads.weights[0];
    const Vec& x = cache.input;
    for (std::size_t i = 0; i < gw.rows; ++i) {
      const double d = delta1[i];
      if (d == 0.0) continue;
      double* row = gw.data.data() + i * gw.cols;
      for (std::size_t j = 0; j < gw.cols; ++j) row[j] += d * x[j];
    }
    for (std::size_t i = 0; i < delta1.size(); ++i) grads.biases[0][i] += delta1[i];
  }

  if (input_grad != nullptr) {
    input_grad->assign(p.input_dim(), 0.0);
    matvec_transpose_accum(p.weights[0], delta1, *input_grad);
  }
}

// Backward pass variant that produces only d(output . upstream)/d(input),
// skipping the parameter gradients. Used where a frozen network sits in the
// middle of a chain (the critic inside the actor update).
inline void mlp_input_grad(const NetParams& p, const ForwardCache& cache,
                           const Vec& upstream, Vec& input_grad) {
  if (upstream.size() != p.output_dim()) {
    throw ShapeError("mlp_input_grad: upstream length mismatch");
  }
  Vec delta3(upstream.size());
  if (p.activation == Activation::relu_relu_tanh) {
    for (std::size_t i = 0; i < delta3.size(); ++i) {
      const double t = cache.post[2][i];
      delta3[i] = upstream[i] * (1.0 - t * t);
    }
  } else {
    delta3 = upstream;
  }
  Vec delta2(p.weights[2].cols, 0.0);
  matvec_transpose_accum(p.weights[2], delta3, delta2);
  for (std::size_t i = 0; i < delta2.size(); ++i) {
    if (cache.pre[1][i] <= 0.0) delta2[i] = 0.0;
  }
  Vec delta1(p.weights[1].cols, 0.0);
  matvec_transpose_accum(p.weights[1], delta2, delta1);
  for (std::size_t i = 0; i < delta1.size(); ++i) {
    if (cache.pre[0][i] <= 0.0) delta1[i] = 0.0;
  }
  input_grad.assign(p.input_dim(), 0.0);
  matvec_transpose_accum(p.weights[0], delta1, input_grad);
}

struct BackwardResult {
  NetParams param_grads;
  Vec input_grad;
};

inline BackwardResult mlp_backward(const NetParams& p, const ForwardCache& cache,
                                   const Vec& upstream) {
  BackwardResult r;
  r.param_grads = zeros_like(p);
  mlp_backward_accum(p, cache, upstream, 1.0, r.param_grads, &r.input_grad);
  return r;
}

}  // namespace paac
