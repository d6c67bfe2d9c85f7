#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "paac/adam.hpp"
#include "paac/grad_check.hpp"
#include "paac/mlp.hpp"
#include "paac/rng.hpp"

using namespace paac;

namespace {

// Straight-line re-implementation of the forward pass, kept deliberately
// independent of mlp_forward (its own loops, no shared helpers).
std::vector<double> oracle_forward(const NetParams& p, const std::vector<double>& x) {
  std::vector<double> h = x;
  for (int layer = 0; layer < 3; ++layer) {
    const DenseMatrix& w = p.weights[layer];
    std::vector<double> z(w.rows, 0.0);
    for (std::size_t i = 0; i < w.rows; ++i) {
      double acc = p.biases[layer][i];
      for (std::size_t j = 0; j < w.cols; ++j) acc += w.data[i * w.cols + j] * h[j];
      z[i] = acc;
    }
    if (layer < 2) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    } else if (p.activation == Activation::relu_relu_tanh) {
      for (double& v : z) v = std::tanh(v);
    }
    h = std::move(z);
  }
  return h;
}

// Textbook Adam (explicit bias-corrected moments), scalar version, used as
// the trace oracle.
struct ScriptedAdam {
  double m = 0.0, v = 0.0;
  int t = 0;
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  explicit ScriptedAdam(double lr_) : lr(lr_) {}
  double step(double param, double grad) {
    t += 1;
    m = beta1 * m + (1 - beta1) * grad;
    v = beta2 * v + (1 - beta2) * grad * grad;
    const double m_hat = m / (1 - std::pow(beta1, t));
    const double v_hat = v / (1 - std::pow(beta2, t));
    return param - lr * m_hat / (std::sqrt(v_hat) + eps);
  }
};

NetParams scalar_net(double w1, double w2, double w3, Activation act) {
  NetParams p = make_net(1, 1, 1, 1, act);
  p.weights[0].data[0] = w1;
  p.weights[1].data[0] = w2;
  p.weights[2].data[0] = w3;
  return p;
}

}  // namespace

TEST(MlpForward, ZeroNetMapsToZero) {
  NetParams p = make_net(3, 8, 8, 2, Activation::relu_relu_linear);
  const Vec out = mlp_forward(p, {0.3, -1.2, 4.5});
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(MlpForward, UnitScalarNetComposesToTanh) {
  NetParams p = scalar_net(1.0, 1.0, 1.0, Activation::relu_relu_tanh);
  const Vec out = mlp_forward(p, {0.5});
  EXPECT_NEAR(out[0], std::tanh(0.5), 1e-15);
  EXPECT_NEAR(out[0], 0.4621, 1e-4);
}

TEST(MlpForward, MatchesStraightLineOracleAtFullWidth) {
  Rng rng(42);
  NetParams p = init_params(rng, 4, 256, 1, Activation::relu_relu_linear);
  Vec input = {0.7, -0.3, 1.9, -2.4};
  const Vec got = mlp_forward(p, input);
  const Vec want = oracle_forward(p, input);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(MlpForward, DeterministicBitIdentical) {
  Rng rng(7);
  NetParams p = init_params(rng, 3, 32, 2, Activation::relu_relu_tanh);
  const Vec input = {0.1, 0.2, -0.3};
  const Vec a = mlp_forward(p, input);
  const Vec b = mlp_forward(p, input);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(MlpForward, RejectsShapeMismatch) {
  NetParams p = make_net(3, 4, 4, 1, Activation::relu_relu_linear);
  EXPECT_THROW(mlp_forward(p, {1.0, 2.0}), ShapeError);
}

TEST(MlpBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(3);
  NetParams p = init_params(rng, 2, 8, 2, Activation::relu_relu_linear);
  ForwardCache cache;
  mlp_forward(p, {0.4, -0.9}, cache);
  const BackwardResult r = mlp_backward(p, cache, {0.0, 0.0});
  for (int l = 0; l < 3; ++l) {
    for (double v : r.param_grads.weights[l].data) EXPECT_EQ(v, 0.0);
    for (double v : r.param_grads.biases[l]) EXPECT_EQ(v, 0.0);
  }
  for (double v : r.input_grad) EXPECT_EQ(v, 0.0);
}

TEST(MlpBackward, ScalarChainRuleThroughLinearRegion) {
  // positive input and weights keep both ReLUs in their linear region
  NetParams p = scalar_net(2.0, 3.0, 5.0, Activation::relu_relu_linear);
  ForwardCache cache;
  mlp_forward(p, {0.5}, cache);
  const BackwardResult r = mlp_backward(p, cache, {1.0});
  EXPECT_DOUBLE_EQ(r.input_grad[0], 2.0 * 3.0 * 5.0);
}

TEST(MlpBackward, MatchesFiniteDifferencesOnRandomNets) {
  // 50 seeded nets per role, relative error < 1e-5 wherever |fd| > 1e-8
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Activation act =
        trial % 2 == 0 ? Activation::relu_relu_linear : Activation::relu_relu_tanh;
    NetParams p = init_params(rng, 3, 12, 2, act);
    Vec input = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vec upstream = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    ForwardCache cache;
    mlp_forward(p, input, cache);
    const BackwardResult analytic = mlp_backward(p, cache, upstream);

    auto f = [&](const NetParams& probe) {
      const Vec y = mlp_forward(probe, input);
      return y[0] * upstream[0] + y[1] * upstream[1];
    };
    const NetParams numeric = finite_diff_grad(f, p, 1e-5);
    for (int l = 0; l < 3; ++l) {
      for (std::size_t i = 0; i < numeric.weights[l].size(); ++i) {
        const double fd = numeric.weights[l].data[i];
        if (std::abs(fd) <= 1e-8) continue;
        EXPECT_LT(std::abs(analytic.param_grads.weights[l].data[i] - fd) / std::abs(fd),
                  1e-5)
            << "trial " << trial << " layer " << l << " weight " << i;
      }
      for (std::size_t i = 0; i < numeric.biases[l].size(); ++i) {
        const double fd = numeric.biases[l][i];
        if (std::abs(fd) <= 1e-8) continue;
        EXPECT_LT(std::abs(analytic.param_grads.biases[l][i] - fd) / std::abs(fd), 1e-5)
            << "trial " << trial << " layer " << l << " bias " << i;
      }
    }
  }
}

TEST(MlpBackward, InputGradMatchesFiniteDifferences) {
  Rng rng(99);
  NetParams p = init_params(rng, 4, 16, 1, Activation::relu_relu_linear);
  const Vec input = {0.3, -0.7, 0.2, 0.9};
  ForwardCache cache;
  mlp_forward(p, input, cache);
  const BackwardResult r = mlp_backward(p, cache, {1.0});
  Vec fast_grad;
  mlp_input_grad(p, cache, {1.0}, fast_grad);
  const double eps = 1e-6;
  for (std::size_t i = 0; i < input.size(); ++i) {
    Vec plus = input, minus = input;
    plus[i] += eps;
    minus[i] -= eps;
    const double fd = (mlp_forward(p, plus)[0] - mlp_forward(p, minus)[0]) / (2 * eps);
    if (std::abs(fd) > 1e-8) {
      EXPECT_LT(std::abs(r.input_grad[i] - fd) / std::abs(fd), 1e-4);
    }
    EXPECT_DOUBLE_EQ(r.input_grad[i], fast_grad[i]);
  }
}

TEST(MlpBackward, RejectsCacheMismatch) {
  NetParams p = make_net(3, 4, 4, 1, Activation::relu_relu_linear);
  NetParams q = make_net(2, 4, 4, 1, Activation::relu_relu_linear);
  ForwardCache cache;
  mlp_forward(q, {1.0, 2.0}, cache);
  EXPECT_THROW(mlp_backward(p, cache, {1.0}), ShapeError);
}

TEST(Adam, ZeroGradientLeavesParamsBitIdentical) {
  Rng rng(5);
  NetParams p = init_params(rng, 2, 8, 1, Activation::relu_relu_linear);
  const NetParams before = p;
  AdamState state = make_adam(p, 1e-3);
  const NetParams grads = zeros_like(p);
  adam_step_inplace(p, grads, state);
  EXPECT_EQ(state.step_count, 1u);
  for (int l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < p.weights[l].size(); ++i) {
      EXPECT_EQ(p.weights[l].data[i], before.weights[l].data[i]);
    }
    for (std::size_t i = 0; i < p.biases[l].size(); ++i) {
      EXPECT_EQ(p.biases[l][i], before.biases[l][i]);
    }
  }
}

TEST(Adam, FirstStepMovesByLearningRate) {
  NetParams p = scalar_net(0.0, 0.0, 1.0, Activation::relu_relu_linear);
  NetParams g = zeros_like(p);
  g.weights[2].data[0] = 1.0;
  AdamState state = make_adam(p, 1e-3);
  adam_step_inplace(p, g, state);
  EXPECT_NEAR(p.weights[2].data[0], 1.0 - 1e-3, 1e-8);
}

TEST(Adam, MatchesScriptedTraceOverHundredSteps) {
  NetParams p = scalar_net(0.0, 0.0, 1.0, Activation::relu_relu_linear);
  NetParams g = zeros_like(p);
  AdamState state = make_adam(p, 1e-2);
  ScriptedAdam oracle(1e-2);
  double oracle_param = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double grad = 0.3;  // identical gradient each step
    g.weights[2].data[0] = grad;
    adam_step_inplace(p, g, state);
    oracle_param = oracle.step(oracle_param, grad);
    ASSERT_NEAR(p.weights[2].data[0], oracle_param, 1e-10) << "step " << i;
  }
}

TEST(Adam, RejectsNonFiniteGradientNamingLayer) {
  NetParams p = make_net(1, 2, 2, 1, Activation::relu_relu_linear);
  NetParams g = zeros_like(p);
  g.weights[1].data[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState state = make_adam(p, 1e-3);
  try {
    adam_step_inplace(p, g, state);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }
}

TEST(Adam, RejectsShapeMismatch) {
  NetParams p = make_net(1, 2, 2, 1, Activation::relu_relu_linear);
  NetParams g = make_net(1, 3, 3, 1, Activation::relu_relu_linear);
  AdamState state = make_adam(p, 1e-3);
  EXPECT_THROW(adam_step_inplace(p, g, state), ShapeError);
}

TEST(FiniteDiff, ConstantFunctionGivesZeros) {
  NetParams p = make_net(1, 2, 2, 1, Activation::relu_relu_linear);
  const NetParams g = finite_diff_grad([](const NetParams&) { return 3.5; }, p, 1e-5);
  for (int l = 0; l < 3; ++l) {
    for (double v : g.weights[l].data) EXPECT_EQ(v, 0.0);
    for (double v : g.biases[l]) EXPECT_EQ(v, 0.0);
  }
}

TEST(FiniteDiff, SumOfSquaresGradient) {
  NetParams p = make_net(1, 2, 2, 1, Activation::relu_relu_linear);
  p.fill(1.0);
  auto sum_sq = [](const NetParams& q) {
    double acc = 0.0;
    for (int l = 0; l < 3; ++l) {
      for (double v : q.weights[l].data) acc += v * v;
      for (double v : q.biases[l]) acc += v * v;
    }
    return acc;
  };
  const NetParams g = finite_diff_grad(sum_sq, p, 1e-5);
  for (int l = 0; l < 3; ++l) {
    for (double v : g.weights[l].data) EXPECT_NEAR(v, 2.0, 1e-9);
    for (double v : g.biases[l]) EXPECT_NEAR(v, 2.0, 1e-9);
  }
}

TEST(Rng, SeededStreamsAreReproducible) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c(124);
  bool any_diff = false;
  Rng a2(123);
  for (int i = 0; i < 100; ++i) any_diff |= (a2.next_u64() != c.next_u64());
  EXPECT_TRUE(any_diff);
}

TEST(Rng, NormalMomentsAreSane) {
  Rng rng(55);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
}
