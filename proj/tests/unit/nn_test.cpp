#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gradcheck.hpp"
#include "rmdl/error.hpp"
#include "rmdl/nn/activation.hpp"
#include "rmdl/nn/layers.hpp"
#include "rmdl/nn/network.hpp"
#include "rmdl/nn/recurrent.hpp"

namespace rmdl::nn {
namespace {

using testing::check_layer;
using testing::uniform_tensor;

constexpr double kGradTolerance = 1e-6;

void expect_gradients_match(const testing::GradCheckReport& report) {
  EXPECT_GT(report.checked, 0u);
  EXPECT_LT(report.max_rel_error, kGradTolerance) << report.worst;
}

TEST(Activation, SigmoidValues) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-15);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-30.0, 30.0);
    EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
  }
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(Activation, ReluValues) {
  EXPECT_EQ(relu(Tensor::from_values({3}, {-2, 3, 0})), Tensor::from_values({3}, {0, 3, 0}));
}

TEST(Activation, SoftmaxValues) {
  const Tensor u = softmax(Tensor::zeros({3}));
  for (double p : u.data()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const Tensor s = softmax(Tensor::from_values({3}, {std::log(1.0), std::log(2.0), std::log(3.0)}));
  EXPECT_NEAR(s[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(s[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s[2], 0.5, 1e-15);
}

TEST(Activation, SoftmaxSumsToOneAndIsShiftInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = rng.uniform_int(1, 12);
    const Tensor z = uniform_tensor({4, k}, rng, -20.0, 20.0);
    const double c = rng.uniform(-100.0, 100.0);
    const Tensor a = softmax(z), b = softmax(ew(BinaryOp::add, z, c));
    for (std::size_t r = 0; r < 4; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) total += a[r * k + j];
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
  const Tensor big = softmax(Tensor::from_values({2}, {1000.0, 0.0}));
  EXPECT_TRUE(all_finite(big));
}

TEST(Activation, GradientsMatchFiniteDifferences) {
  Rng rng(3);
  Sigmoid sig;
  Tanh th;
  Softmax sm;
  expect_gradients_match(check_layer(sig, uniform_tensor({3, 4}, rng, -3, 3), Mode::eval, rng));
  expect_gradients_match(check_layer(th, uniform_tensor({3, 4}, rng, -3, 3), Mode::eval, rng));
  expect_gradients_match(check_layer(sm, uniform_tensor({3, 5}, rng, -3, 3), Mode::eval, rng));
  // Values kept away from the kink at 0.
  ReLU re;
  Tensor x = uniform_tensor({3, 4}, rng, 0.1, 1.0);
  for (std::size_t i = 0; i < x.size(); i += 2) x[i] = -x[i];
  expect_gradients_match(check_layer(re, x, Mode::eval, rng));
}

TEST(Layer, BackwardWithoutForwardThrows) {
  Dense d(2, 2);
  EXPECT_THROW(d.backward(Tensor::zeros({1, 2})), Error);
  ReLU r;
  r.forward(Tensor::zeros({1, 2}), Mode::eval);
  r.backward(Tensor::zeros({1, 2}));
  EXPECT_THROW(r.backward(Tensor::zeros({1, 2})), Error);
}

TEST(Layer, KindNamesRoundTrip) {
  for (auto kind : {LayerKind::dense, LayerKind::conv2d, LayerKind::lstm, LayerKind::gru, LayerKind::embedding}) {
    EXPECT_EQ(layer_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(layer_kind_from_string("attention"), Error);
}

TEST(Dense, IdentityAndConstant) {
  Dense d(3, 3);
  for (std::size_t i = 0; i < 3; ++i) d.weight().at({i, i}) = 1.0;
  Rng rng(4);
  const Tensor x = uniform_tensor({2, 3}, rng);
  EXPECT_EQ(d.forward(x, Mode::eval), x);

  Dense c(3, 2);
  c.bias() = Tensor::from_values({2}, {0.25, -1.5});
  const Tensor y = c.forward(x, Mode::eval);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(y.at({r, 0}), 0.25);
    EXPECT_EQ(y.at({r, 1}), -1.5);
  }
  EXPECT_THROW(c.forward(Tensor::zeros({2, 4}), Mode::eval), ShapeError);
}

TEST(Dense, GradientsMatchFiniteDifferences) {
  Rng rng(5);
  Dense d(4, 3);
  d.initialize(rng);
  d.bias() = uniform_tensor({3}, rng);
  expect_gradients_match(check_layer(d, uniform_tensor({5, 4}, rng), Mode::eval, rng));
}

TEST(Dense, GlorotBounds) {
  Rng rng(6);
  Dense d(30, 20);
  d.initialize(rng);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double w : d.weight().data()) EXPECT_LE(std::abs(w), limit);
  for (double b : d.bias().data()) EXPECT_EQ(b, 0.0);
}

TEST(Conv, UnitKernelIsIdentity) {
  Conv2D conv(1, 1, 1);
  conv.weight()[0] = 1.0;
  Rng rng(7);
  const Tensor x = uniform_tensor({2, 4, 3, 1}, rng);
  EXPECT_EQ(conv.forward(x, Mode::eval), x);

  Conv1D c1(1, 1, 1);
  c1.weight()[0] = 1.0;
  const Tensor s = uniform_tensor({2, 6, 1}, rng);
  EXPECT_EQ(c1.forward(s, Mode::eval), s);
}

TEST(Conv, HandSum) {
  Conv2D conv(1, 1, 2);
  conv.weight().fill(1.0);
  const Tensor y = conv.forward(Tensor::from_values({1, 2, 2, 1}, {1, 2, 3, 4}), Mode::eval);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y[0], 10.0);
}

TEST(Conv, KernelLargerThanInputThrows) {
  Conv2D conv(1, 2, 5);
  EXPECT_THROW(conv.forward(Tensor::zeros({1, 4, 8, 1}), Mode::eval), ShapeError);
  Conv1D c1(3, 2, 4);
  EXPECT_THROW(c1.forward(Tensor::zeros({1, 3, 3}), Mode::eval), ShapeError);
  EXPECT_THROW(c1.forward(Tensor::zeros({1, 6, 2}), Mode::eval), ShapeError);
}

TEST(Conv, OutputExtentProperty) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t h = rng.uniform_int(3, 11), w = rng.uniform_int(3, 11);
    const std::size_t k = rng.uniform_int(1, std::min<std::uint64_t>(h, w));
    const std::size_t s = rng.uniform_int(1, 3);
    Conv2D conv(2, 3, k, s);
    conv.initialize(rng);
    const Tensor y = conv.forward(uniform_tensor({1, h, w, 2}, rng), Mode::eval);
    EXPECT_EQ(y.shape(), (Shape{1, (h - k) / s + 1, (w - k) / s + 1, 3}));
    MaxPool pool(k, s);
    EXPECT_EQ(pool.forward(uniform_tensor({1, h, w, 2}, rng), Mode::eval).shape(),
              (Shape{1, (h - k) / s + 1, (w - k) / s + 1, 2}));
    EXPECT_EQ(valid_extent(h, k, s), (h - k) / s + 1);
  }
}

TEST(Conv, Conv2DGradientsMatchFiniteDifferences) {
  Rng rng(9);
  for (std::size_t stride : {1u, 2u}) {
    Conv2D conv(2, 3, 3, stride);
    conv.initialize(rng);
    conv.bias() = uniform_tensor({3}, rng);
    expect_gradients_match(check_layer(conv, uniform_tensor({1, 5, 5, 2}, rng), Mode::eval, rng));
  }
}

TEST(Conv, Conv1DGradientsMatchFiniteDifferences) {
  Rng rng(10);
  for (std::size_t stride : {1u, 2u}) {
    Conv1D conv(3, 4, 3, stride);
    conv.initialize(rng);
    conv.bias() = uniform_tensor({4}, rng);
    expect_gradients_match(check_layer(conv, uniform_tensor({2, 7, 3}, rng), Mode::eval, rng));
  }
}

TEST(MaxPool, Values) {
  MaxPool pool(2, 2);
  const Tensor y = pool.forward(Tensor::from_values({1, 2, 2, 1}, {1, 2, 3, 4}), Mode::eval);
  EXPECT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y[0], 4.0);
  EXPECT_EQ(pool.forward(Tensor::zeros({1, 28, 28, 1}), Mode::eval).shape(), (Shape{1, 14, 14, 1}));
  EXPECT_THROW(MaxPool(3, 1).forward(Tensor::zeros({1, 2, 2, 1}), Mode::eval), ShapeError);
}

TEST(MaxPool, TiesRouteToFirstElement) {
  MaxPool pool(2, 2);
  pool.forward(Tensor::ones({1, 2, 2, 1}), Mode::eval);
  const Tensor g = pool.backward(Tensor::from_values({1, 1, 1, 1}, {5.0}));
  EXPECT_EQ(g, Tensor::from_values({1, 2, 2, 1}, {5, 0, 0, 0}));

  MaxPool seq(3, 3);
  seq.forward(Tensor::ones({1, 3, 1}), Mode::eval);
  EXPECT_EQ(seq.backward(Tensor::from_values({1, 1, 1}, {2.0})), Tensor::from_values({1, 3, 1}, {2, 0, 0}));
}

TEST(MaxPool, GradientsMatchFiniteDifferences) {
  Rng rng(11);
  MaxPool pool2(2, 2);
  expect_gradients_match(check_layer(pool2, testing::well_separated_tensor({2, 4, 5, 2}, rng), Mode::eval, rng));
  MaxPool overlap(3, 1);
  expect_gradients_match(check_layer(overlap, testing::well_separated_tensor({1, 5, 5, 1}, rng), Mode::eval, rng));
  MaxPool pool1(2, 2);
  expect_gradients_match(check_layer(pool1, testing::well_separated_tensor({2, 7, 3}, rng), Mode::eval, rng));
}

TEST(Reshape, FlattenRoundTrip) {
  Rng rng(12);
  Flatten flat;
  const Tensor x = uniform_tensor({2, 3, 4, 2}, rng);
  const Tensor y = flat.forward(x, Mode::eval);
  EXPECT_EQ(y.shape(), (Shape{2, 24}));
  EXPECT_EQ(flat.backward(y), x);
  Reshape rows({28, 28});
  EXPECT_EQ(rows.forward(Tensor::zeros({3, 784}), Mode::eval).shape(), (Shape{3, 28, 28}));
}

TEST(Dropout, EvalAndZeroRateAreIdentity) {
  Rng rng(13);
  const Tensor x = uniform_tensor({4, 6}, rng);
  EXPECT_EQ(dropout_apply(x, 0.4, Mode::eval, rng), x);
  EXPECT_EQ(dropout_apply(x, 0.0, Mode::train, rng), x);
  EXPECT_EQ(dropout_apply(x, 0.0, Mode::eval, rng), x);
  Dropout layer(0.3, 1);
  EXPECT_EQ(layer.forward(x, Mode::eval), x);
  EXPECT_THROW(Dropout(1.0, 1), DomainError);
  EXPECT_THROW(Dropout(-0.1, 1), DomainError);
}

TEST(Dropout, MonteCarloMeanIsPreserved) {
  Rng rng(14);
  const Tensor ones = Tensor::ones({100000});
  const Tensor y = dropout_apply(ones, 0.3, Mode::train, rng);
  double total = 0.0;
  std::size_t kept = 0;
  for (double v : y.data()) {
    total += v;
    if (v != 0.0) {
      ++kept;
      EXPECT_NEAR(v, 1.0 / 0.7, 1e-15);
    }
  }
  EXPECT_NEAR(total / 100000.0, 1.0, 0.01);
  EXPECT_GT(kept, 0u);
}

TEST(Dropout, TrainBackwardUsesTheForwardMask) {
  Rng rng(15);
  Dropout layer(0.5, 99);
  const Tensor x = uniform_tensor({3, 8}, rng);
  const Tensor y = layer.forward(x, Mode::train);
  const Tensor g = layer.backward(Tensor::ones({3, 8}));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i] * g[i]);
  Dropout eval_layer(0.5, 99);
  expect_gradients_match(check_layer(eval_layer, x, Mode::eval, rng));
}

TEST(Embedding, LookupPaddingAndGradient) {
  Rng rng(16);
  Embedding emb(6, 3);
  emb.initialize(rng);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(emb.table().at({0, j}), 0.0);
  const Tensor idx = Tensor::from_values({2, 3}, {1, 0, 5, 2, 2, 0});
  const Tensor y = emb.forward(idx, Mode::eval);
  EXPECT_EQ(y.shape(), (Shape{2, 3, 3}));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(y.at({0, 0, j}), emb.table().at({1, j}));
    EXPECT_EQ(y.at({0, 1, j}), 0.0);
    EXPECT_EQ(y.at({1, 1, j}), emb.table().at({2, j}));
  }
  EXPECT_THROW(emb.forward(Tensor::from_values({1, 1}, {6}), Mode::eval), ShapeError);

  emb.table().at({0, 1}) = 0.7;  // padding ignores the stored row
  EXPECT_EQ(emb.forward(idx, Mode::eval).at({0, 1, 1}), 0.0);
  emb.table().at({0, 1}) = 0.0;

  emb.zero_grad();
  expect_gradients_match(check_layer(emb, idx, Mode::eval, rng, /*check_input=*/false));
  emb.zero_grad();
  emb.forward(idx, Mode::eval);
  emb.backward(uniform_tensor({2, 3, 3}, rng));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(emb.params()[0].grad->at({0, j}), 0.0);
}

LstmParams random_lstm(std::size_t in, std::size_t h, Rng& rng) {
  LstmParams p = LstmParams::zeros(in, h);
  LstmParams scratch = LstmParams::zeros(in, h);
  for (auto& param : p.bind(scratch)) {
    for (auto& v : param.value->data()) v = rng.uniform(-0.8, 0.8);
  }
  return p;
}

TEST(Lstm, ZeroParametersGiveHalfGates) {
  const LstmParams p = LstmParams::zeros(3, 2);
  Rng rng(17);
  const auto step = lstm_step(uniform_tensor({2, 3}, rng), Tensor::zeros({2, 2}), Tensor::zeros({2, 2}), p);
  for (double g : step.cache.input_gate.data()) EXPECT_EQ(g, 0.5);
  for (double g : step.cache.forget_gate.data()) EXPECT_EQ(g, 0.5);
  for (double g : step.cache.output_gate.data()) EXPECT_EQ(g, 0.5);
  for (double g : step.cache.candidate.data()) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(step.c, Tensor::zeros({2, 2}));
  EXPECT_EQ(step.h, Tensor::zeros({2, 2}));
}

TEST(Lstm, SaturatedForgetGateCarriesMemory) {
  Rng rng(18);
  LstmParams p = random_lstm(3, 4, rng);
  p.b_f.fill(50.0);
  p.b_i.fill(-50.0);
  const Tensor c_prev = uniform_tensor({2, 4}, rng);
  const auto step = lstm_step(uniform_tensor({2, 3}, rng), uniform_tensor({2, 4}, rng), c_prev, p);
  for (std::size_t i = 0; i < c_prev.size(); ++i) EXPECT_NEAR(step.c[i], c_prev[i], 1e-12);
}

TEST(Lstm, ZeroEverythingGivesZeroStates) {
  Lstm layer(3, 5, true);
  const Tensor y = layer.forward(Tensor::zeros({2, 6, 3}), Mode::eval);
  EXPECT_EQ(y, Tensor::zeros({2, 6, 5}));
}

TEST(Lstm, InitializationSetsForgetBias) {
  Rng rng(19);
  Lstm layer(3, 4, false);
  layer.initialize(rng);
  for (double b : layer.weights().b_f.data()) EXPECT_EQ(b, 1.0);
  for (double b : layer.weights().b_i.data()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(layer.weights().w_i.shape(), (Shape{7, 4}));
}

TEST(Lstm, StepGradientsMatchFiniteDifferences) {
  Rng rng(20);
  const LstmParams p = random_lstm(3, 4, rng);
  Tensor x = uniform_tensor({2, 3}, rng), h = uniform_tensor({2, 4}, rng), c = uniform_tensor({2, 4}, rng);
  const Tensor rh = uniform_tensor({2, 4}, rng), rc = uniform_tensor({2, 4}, rng);
  auto objective = [&] {
    const auto s = lstm_step(x, h, c, p);
    return testing::project(s.h, rh) + testing::project(s.c, rc);
  };
  LstmParams grads = LstmParams::zeros(3, 4);
  const auto step = lstm_step(x, h, c, p);
  const auto back = lstm_step_backward(rh, rc, step.cache, p, grads);
  testing::GradCheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) report.record(back.dx[i], testing::central_difference(x[i], objective), "x");
  for (std::size_t i = 0; i < h.size(); ++i) report.record(back.dh_prev[i], testing::central_difference(h[i], objective), "h");
  for (std::size_t i = 0; i < c.size(); ++i) report.record(back.dc_prev[i], testing::central_difference(c[i], objective), "c");
  expect_gradients_match(report);
}

TEST(Lstm, SequenceGradientsMatchFiniteDifferences) {
  Rng rng(21);
  for (bool sequences : {false, true}) {
    Lstm layer(3, 4, sequences);
    layer.initialize(rng);
    for (auto& param : layer.params()) {
      for (auto& v : param.value->data()) v += rng.uniform(-0.2, 0.2);
    }
    expect_gradients_match(check_layer(layer, uniform_tensor({2, 4, 3}, rng), Mode::eval, rng));
  }
}

GruParams random_gru(std::size_t in, std::size_t h, Rng& rng) {
  GruParams p = GruParams::zeros(in, h);
  GruParams scratch = GruParams::zeros(in, h);
  for (auto& param : p.bind(scratch)) {
    for (auto& v : param.value->data()) v = rng.uniform(-0.8, 0.8);
  }
  return p;
}

TEST(Gru, ZeroParametersGiveHalfUpdateGate) {
  const GruParams p = GruParams::zeros(3, 2);
  Rng rng(22);
  const auto step = gru_step(uniform_tensor({2, 3}, rng), Tensor::zeros({2, 2}), p);
  for (double z : step.cache.update_gate.data()) EXPECT_EQ(z, 0.5);
  for (double c : step.cache.candidate.data()) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(step.h, Tensor::zeros({2, 2}));
}

TEST(Gru, SaturatedUpdateGateCopiesState) {
  Rng rng(23);
  GruParams p = random_gru(3, 4, rng);
  p.b_z.fill(50.0);
  const Tensor h_prev = uniform_tensor({2, 4}, rng);
  const auto step = gru_step(uniform_tensor({2, 3}, rng), h_prev, p);
  for (std::size_t i = 0; i < h_prev.size(); ++i) EXPECT_NEAR(step.h[i], h_prev[i], 1e-12);
}

TEST(Gru, StepGradientsMatchFiniteDifferences) {
  Rng rng(24);
  const GruParams p = random_gru(3, 4, rng);
  Tensor x = uniform_tensor({2, 3}, rng), h = uniform_tensor({2, 4}, rng);
  const Tensor r = uniform_tensor({2, 4}, rng);
  auto objective = [&] { return testing::project(gru_step(x, h, p).h, r); };
  GruParams grads = GruParams::zeros(3, 4);
  const auto back = gru_step_backward(r, gru_step(x, h, p).cache, p, grads);
  testing::GradCheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) report.record(back.dx[i], testing::central_difference(x[i], objective), "x");
  for (std::size_t i = 0; i < h.size(); ++i) report.record(back.dh_prev[i], testing::central_difference(h[i], objective), "h");
  expect_gradients_match(report);
}

TEST(Gru, SequenceGradientsMatchFiniteDifferences) {
  Rng rng(25);
  for (bool sequences : {false, true}) {
    Gru layer(3, 4, sequences);
    layer.initialize(rng);
    for (auto& param : layer.params()) {
      for (auto& v : param.value->data()) v += rng.uniform(-0.2, 0.2);
    }
    expect_gradients_match(check_layer(layer, uniform_tensor({2, 4, 3}, rng), Mode::eval, rng));
  }
}

TEST(Loss, CrossEntropyValues) {
  const std::vector<int> labels{0, 2};
  const auto uniform = loss_ce(Tensor::zeros({2, 4}), labels);
  EXPECT_NEAR(uniform.loss, std::log(4.0), 1e-15);
  const auto confident = loss_ce(Tensor::from_values({1, 3}, {100, 0, 0}), std::vector<int>{0});
  EXPECT_LT(confident.loss, 1e-40);
  EXPECT_THROW(loss_ce(Tensor::zeros({2, 4}), std::vector<int>{0, 4}), DomainError);
  EXPECT_THROW(loss_ce(Tensor::zeros({2, 4}), std::vector<int>{0}), ShapeError);
}

TEST(Network, DenseEndToEndGradient) {
  Rng rng(26);
  Network net;
  net.emplace<Dense>(5, 6).initialize(rng);
  net.emplace<Tanh>();
  net.emplace<Dense>(6, 3).initialize(rng);
  std::vector<int> labels(8);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_int(0, 2));
  expect_gradients_match(testing::check_network(net, uniform_tensor({8, 5}, rng), labels));
}

TEST(Network, ConvAndRecurrentEndToEndGradient) {
  Rng rng(27);
  Network cnn;
  cnn.emplace<Conv2D>(1, 2, 3).initialize(rng);
  cnn.emplace<Tanh>();
  cnn.emplace<Flatten>();
  cnn.emplace<Dense>(18, 3).initialize(rng);
  expect_gradients_match(testing::check_network(cnn, uniform_tensor({2, 5, 5, 1}, rng), {0, 2}));

  Network rnn;
  rnn.emplace<Embedding>(7, 3).initialize(rng);
  rnn.emplace<Gru>(3, 4, true).initialize(rng);
  rnn.emplace<Lstm>(4, 3, false).initialize(rng);
  rnn.emplace<Dense>(3, 2).initialize(rng);
  expect_gradients_match(testing::check_network(rnn, Tensor::from_values({2, 4}, {1, 3, 6, 0, 2, 2, 5, 4}), {1, 0}));
}

TEST(Network, EvalForwardIsBitIdenticalAndCopiesAreDeep) {
  Rng rng(28);
  Network net;
  net.emplace<Dense>(4, 5).initialize(rng);
  net.emplace<ReLU>();
  net.emplace<Dropout>(0.5, 3);
  net.emplace<Dense>(5, 2).initialize(rng);
  const Tensor x = uniform_tensor({3, 4}, rng);
  const Tensor a = net.forward(x, Mode::eval);
  EXPECT_EQ(a, net.forward(x, Mode::eval));

  Network copy = net;
  EXPECT_EQ(copy.forward(x, Mode::eval), a);
  net.params()[0].value->fill(0.0);
  EXPECT_EQ(copy.forward(x, Mode::eval), a);
  EXPECT_EQ(copy.parameter_count(), 4u * 5 + 5 + 5 * 2 + 2);
  EXPECT_EQ(copy.params()[0].name, "0.W");
}

}  // namespace
}  // namespace rmdl::nn
