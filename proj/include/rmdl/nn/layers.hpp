#pragma once

#include <cstdint>

#include "rmdl/nn/layer.hpp"
#include "rmdl/random.hpp"

namespace rmdl::nn {

// Uniform in ±sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Output extent of a valid (unpadded) window sweep: floor((n - k) / stride) + 1.
std::size_t valid_extent(std::size_t n, std::size_t k, std::size_t stride);

/// Fully connected layer, y = xW + b, over a B×in batch.
class Dense final : public Layer {
 public:
  Dense(std::size_t in, std::size_t out);

  LayerKind kind() const override { return LayerKind::dense; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  std::vector<Param> params() override;

  void initialize(Rng& rng);

  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  Tensor w_, b_, dw_, db_;
  Tensor x_;
  CacheGuard guard_;
};

/// 2-D convolution over B×H×W×C input: cross-correlation, valid padding.
/// The kernel is stored as a (k·k·C)×F matrix with rows ordered (row, col, channel).
class Conv2D final : public Layer {
 public:
  Conv2D(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride = 1);

  LayerKind kind() const override { return LayerKind::conv2d; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2D>(*this); }
  std::vector<Param> params() override;

  void initialize(Rng& rng);

  std::size_t kernel() const { return kernel_; }
  std::size_t stride() const { return stride_; }
  std::size_t filters() const { return filters_; }
  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  std::size_t channels_, filters_, kernel_, stride_;
  Tensor w_, b_, dw_, db_;
  Tensor cols_;
  Shape in_shape_;
  CacheGuard guard_;
};

/// 1-D convolution over B×L×C input (one row per sequence position).
class Conv1D final : public Layer {
 public:
  Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride = 1);

  LayerKind kind() const override { return LayerKind::conv1d; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1D>(*this); }
  std::vector<Param> params() override;

  void initialize(Rng& rng);

  std::size_t kernel() const { return kernel_; }
  std::size_t stride() const { return stride_; }
  std::size_t filters() const { return filters_; }
  Tensor& weight() { return w_; }
  Tensor& bias() { return b_; }

 private:
  std::size_t channels_, filters_, kernel_, stride_;
  Tensor w_, b_, dw_, db_;
  Tensor cols_;
  Shape in_shape_;
  CacheGuard guard_;
};

/// Max pooling. Rank-4 input (B×H×W×C) pools square windows over H and W;
/// rank-3 input (B×L×C) pools along L. Ties go to the first element in
/// row-major order, and backward routes the gradient there.
class MaxPool final : public Layer {
 public:
  MaxPool(std::size_t window, std::size_t stride);

  LayerKind kind() const override { return LayerKind::maxpool; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool>(*this); }

  std::size_t window() const { return window_; }
  std::size_t stride() const { return stride_; }

 private:
  std::size_t window_, stride_;
  std::vector<std::size_t> argmax_;
  Shape in_shape_;
  CacheGuard guard_;
};

// Keeps the batch axis and reshapes each sample to `sample_shape`.
class Reshape : public Layer {
 public:
  explicit Reshape(Shape sample_shape) : sample_shape_(std::move(sample_shape)) {}

  LayerKind kind() const override { return LayerKind::reshape; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Reshape>(*this); }

  const Shape& sample_shape() const { return sample_shape_; }

 protected:
  Shape sample_shape_;
  Shape in_shape_;
  CacheGuard guard_;
};

// Collapses everything after the batch axis.
class Flatten final : public Reshape {
 public:
  Flatten() : Reshape({}) {}

  LayerKind kind() const override { return LayerKind::flatten; }
  Tensor forward(const Tensor& x, Mode mode) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

/// Inverted dropout: in training each element survives with probability 1-p and
/// is scaled by 1/(1-p); in evaluation the layer is the identity.
class Dropout final : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed);

  LayerKind kind() const override { return LayerKind::dropout; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

  double rate() const { return rate_; }

 private:
  double rate_;
  Rng rng_;
  Tensor mask_;
  bool masked_ = false;
  CacheGuard guard_;
};

// Functional form of the dropout layer.
Tensor dropout_apply(const Tensor& x, double rate, Mode mode, Rng& rng);

/// Token-index lookup: B×T indices (stored as doubles) -> B×T×D vectors.
/// Index 0 is the padding/unknown token and always maps to the zero vector;
/// its table row receives no gradient.
class Embedding final : public Layer {
 public:
  Embedding(std::size_t vocab_size, std::size_t dim);

  LayerKind kind() const override { return LayerKind::embedding; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Embedding>(*this); }
  std::vector<Param> params() override;

  void initialize(Rng& rng);

  std::size_t vocab_size() const { return table_.dim(0); }
  std::size_t dim() const { return table_.dim(1); }
  Tensor& table() { return table_; }

 private:
  Tensor table_, dtable_;
  std::vector<std::size_t> indices_;
  Shape in_shape_;
  CacheGuard guard_;
};

}  // namespace rmdl::nn
