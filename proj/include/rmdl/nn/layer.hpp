#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rmdl/tensor.hpp"

namespace rmdl::nn {

enum class Mode { train, eval };

enum class LayerKind {
  dense,
  sigmoid,
  relu,
  tanh,
  softmax,
  conv1d,
  conv2d,
  maxpool,
  flatten,
  reshape,
  dropout,
  embedding,
  lstm,
  gru,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

// A trainable tensor and its gradient accumulator, both owned by a layer.
struct Param {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

/// One stage of a feed-forward stack.
///
/// forward() caches whatever backward() needs; backward() consumes that cache,
/// adds parameter gradients into the layer's accumulators and returns the
/// gradient with respect to the layer input. Calling backward() without a
/// preceding forward() throws.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;

  virtual std::vector<Param> params() { return {}; }

  void zero_grad() {
    for (auto& p : params()) p.grad->fill(0.0);
  }

  // When false, backward() may skip dL/dx and return an empty tensor.
  void set_input_grad_needed(bool needed) { input_grad_needed_ = needed; }

 protected:
  bool input_grad_needed_ = true;
};

// Shared guard for the forward/backward cache protocol.
class CacheGuard {
 public:
  void arm() { armed_ = true; }
  void consume(std::string_view layer);

 private:
  bool armed_ = false;
};

}  // namespace rmdl::nn
