#include "rmdl/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rmdl/error.hpp"
#include "rmdl/random.hpp"

namespace rmdl::optim {
namespace {

Tensor scalar(double v) { return Tensor::from_values({1}, {v}); }

struct OneParam {
  Tensor value, grad;
  std::vector<nn::Param> params() { return {nn::Param{"theta", &value, &grad}}; }
};

TEST(Optim, SgdValues) {
  Tensor theta = scalar(1.0);
  sgd_step(theta, scalar(0.5), 0.1);
  EXPECT_DOUBLE_EQ(theta[0], 0.95);

  Tensor twice = scalar(1.0);
  sgd_step(twice, scalar(0.5), 0.1);
  sgd_step(twice, scalar(0.5), 0.1);
  EXPECT_NEAR(twice[0], 1.0 - 2 * 0.1 * 0.5, 1e-15);
}

TEST(Optim, MomentumValues) {
  Tensor theta = scalar(0.0), velocity = scalar(0.0);
  const double g = 0.8;
  momentum_step(theta, scalar(g), velocity, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(theta[0], -0.1 * g);
  const double before = theta[0];
  momentum_step(theta, scalar(g), velocity, 0.1, 0.5);
  EXPECT_NEAR(before - theta[0], 0.15 * g, 1e-15);
}

TEST(Optim, MomentumWithZeroGammaIsBitwiseSgd) {
  Rng rng(1);
  OptimizerConfig mc = OptimizerConfig::defaults(OptimizerKind::momentum);
  mc.momentum = 0.0;
  OptimizerState mom(mc), sgd(OptimizerConfig::defaults(OptimizerKind::sgd));
  OneParam a{Tensor({5}), Tensor({5})}, b{Tensor({5}), Tensor({5})};
  for (std::size_t i = 0; i < 5; ++i) a.value[i] = b.value[i] = rng.uniform(-1, 1);
  for (int s = 0; s < 20; ++s) {
    for (std::size_t i = 0; i < 5; ++i) a.grad[i] = b.grad[i] = rng.uniform(-3, 3);
    mom.step(a.params());
    sgd.step(b.params());
    EXPECT_EQ(a.value, b.value);
  }
}

TEST(Optim, RmspropFirstStep) {
  const double g = -0.3, alpha = 1e-3, eps = 1e-8;
  Tensor theta = scalar(2.0), v = scalar(0.0);
  rmsprop_step(theta, scalar(g), v, alpha, 0.9, eps);
  EXPECT_DOUBLE_EQ(theta[0], 2.0 - alpha * g / (std::sqrt(0.1 * g * g) + eps));

  Tensor t1 = scalar(0.0), v1 = scalar(0.0), t2 = scalar(0.0), v2 = scalar(0.0);
  rmsprop_step(t1, scalar(0.4), v1, alpha, 0.9, eps);
  rmsprop_step(t2, scalar(0.8), v2, alpha, 0.9, eps);
  EXPECT_LT(std::abs(t2[0] / t1[0] - 1.0), 0.01);
}

TEST(Optim, AdamFirstStepIsSignTimesAlpha) {
  Rng rng(2);
  const OptimizerConfig c = OptimizerConfig::defaults(OptimizerKind::adam);
  for (int trial = 0; trial < 100; ++trial) {
    double g = std::pow(10.0, rng.uniform(-6, 3));
    if (rng.bernoulli(0.5)) g = -g;
    Tensor theta = scalar(0.0), m = scalar(0.0), v = scalar(0.0);
    adam_step(theta, scalar(g), m, v, 1, c);
    EXPECT_NEAR(theta[0], -c.learning_rate * g / (std::abs(g) + c.epsilon), 1e-15);
    EXPECT_LE(std::abs(theta[0]), c.learning_rate);
  }
  Tensor theta = scalar(0.0), m = scalar(0.0), v = scalar(0.0);
  EXPECT_THROW(adam_step(theta, scalar(1.0), m, v, 0, c), DomainError);
}

TEST(Optim, Defaults) {
  const auto adam = OptimizerConfig::defaults(OptimizerKind::adam);
  EXPECT_EQ(adam.learning_rate, 1e-3);
  EXPECT_EQ(adam.beta1, 0.9);
  EXPECT_EQ(adam.beta2, 0.999);
  EXPECT_EQ(adam.epsilon, 1e-8);
  EXPECT_EQ(OptimizerConfig::defaults(OptimizerKind::rmsprop).rho, 0.9);
  EXPECT_EQ(OptimizerConfig::defaults(OptimizerKind::rmsprop).learning_rate, 1e-3);
  EXPECT_EQ(OptimizerConfig::defaults(OptimizerKind::sgd).learning_rate, 1e-2);
  EXPECT_EQ(OptimizerConfig::defaults(OptimizerKind::momentum).momentum, 0.9);
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::momentum, OptimizerKind::rmsprop, OptimizerKind::adam}) {
    EXPECT_EQ(optimizer_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(optimizer_kind_from_string("adagrad"), DomainError);
}

TEST(Optim, ZeroGradientLeavesParametersUnchanged) {
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::momentum, OptimizerKind::rmsprop, OptimizerKind::adam}) {
    OptimizerState state(OptimizerConfig::defaults(kind));
    OneParam p{Tensor::from_values({3}, {0.5, -1.0, 2.0}), Tensor::zeros({3})};
    const Tensor before = p.value;
    for (int s = 0; s < 3; ++s) state.step(p.params());
    EXPECT_EQ(p.value, before) << to_string(kind);
    EXPECT_EQ(state.steps(), 3u);
  }
}

TEST(Optim, StateSlotsMirrorParameters) {
  OptimizerState state;
  Tensor w({3, 2}), gw = Tensor::ones({3, 2}), b({2}), gb = Tensor::ones({2});
  std::vector<nn::Param> params{{"W", &w, &gw}, {"b", &b, &gb}};
  state.step(params);
  ASSERT_EQ(state.first_moments().size(), 2u);
  EXPECT_EQ(state.first_moments()[0].shape(), w.shape());
  EXPECT_EQ(state.second_moments()[1].shape(), b.shape());
  EXPECT_EQ(state.steps(), 1u);
}

TEST(Optim, NonFiniteGradientRejectsTheWholeStep) {
  OptimizerState state;
  Tensor w = Tensor::ones({2}), gw = Tensor::ones({2}), b = Tensor::ones({2}), gb = Tensor::ones({2});
  std::vector<nn::Param> params{{"W", &w, &gw}, {"b", &b, &gb}};
  state.step(params);
  const OptimizerState snapshot = state;
  const Tensor w_before = w, b_before = b;
  gb[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(state.step(params), NonFiniteGradient);
  EXPECT_EQ(w, w_before);
  EXPECT_EQ(b, b_before);
  EXPECT_TRUE(state == snapshot);
  gb[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(state.step(params), NonFiniteGradient);
}

TEST(Optim, InvalidHyperparameters) {
  OptimizerConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(OptimizerState{c}, DomainError);
  c = {};
  c.momentum = 1.0;
  EXPECT_THROW(OptimizerState{c}, DomainError);
  c = {};
  c.beta2 = 1.0;
  EXPECT_THROW(OptimizerState{c}, DomainError);
  c = {};
  c.epsilon = 0.0;
  EXPECT_THROW(OptimizerState{c}, DomainError);
}

}  // namespace
}  // namespace rmdl::optim
