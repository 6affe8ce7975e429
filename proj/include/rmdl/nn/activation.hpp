#pragma once

#include "rmdl/nn/layer.hpp"

namespace rmdl::nn {

double sigmoid(double x);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);

// Softmax over the last axis, with max subtraction.
Tensor softmax(const Tensor& z);

class Sigmoid final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::sigmoid; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Sigmoid>(*this); }

 private:
  Tensor y_;
  CacheGuard guard_;
};

class ReLU final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::relu; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  Tensor x_;
  CacheGuard guard_;
};

class Tanh final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::tanh; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Tanh>(*this); }

 private:
  Tensor y_;
  CacheGuard guard_;
};

// Networks end in raw logits and leave softmax to the loss; this layer exists for
// models that need explicit probabilities mid-stack.
class Softmax final : public Layer {
 public:
  LayerKind kind() const override { return LayerKind::softmax; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }

 private:
  Tensor y_;
  CacheGuard guard_;
};

}  // namespace rmdl::nn
