#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rmdl/nn/layer.hpp"

namespace rmdl::nn {

struct LossResult {
  double loss;       // mean over the batch of -ln softmax(logits)[label]
  Tensor grad;       // dL/dlogits, B×K
};

// Softmax cross-entropy on raw logits. Throws on a label outside [0, K).
LossResult loss_ce(const Tensor& logits, std::span<const int> labels);

/// Sequential stack of layers ending in class logits.
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer);

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  Tensor forward(const Tensor& x, Mode mode);

  // Back-propagates dL/dlogits through every layer, accumulating parameter
  // gradients. Stops at the first layer that owns parameters.
  void backward(const Tensor& grad_logits);

  void zero_grad();

  // Parameters of all layers, named "<layer index>.<param>".
  std::vector<Param> params();
  std::size_t parameter_count();

  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace rmdl::nn
