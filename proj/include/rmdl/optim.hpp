#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rmdl/nn/layer.hpp"
#include "rmdl/tensor.hpp"

namespace rmdl::optim {

enum class OptimizerKind { sgd, momentum, rmsprop, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // γ
  double rho = 0.9;       // RMSProp decay
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // α = 1e-2 for SGD and momentum, 1e-3 for RMSProp and Adam.
  static OptimizerConfig defaults(OptimizerKind kind);

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

// Single-tensor update rules. `theta` is modified in place.

// θ ← θ − α·g
void sgd_step(Tensor& theta, const Tensor& g, double learning_rate);

// v ← γ·v + α·g; θ ← θ − v
void momentum_step(Tensor& theta, const Tensor& g, Tensor& velocity, double learning_rate, double gamma);

// v ← ρ·v + (1−ρ)·g²; θ ← θ − α·g / (√v + ε). No bias correction.
void rmsprop_step(Tensor& theta, const Tensor& g, Tensor& v, double learning_rate, double rho, double epsilon);

// m ← β1·m + (1−β1)·g; v ← β2·v + (1−β2)·g²;
// θ ← θ − α·m̂ / (√v̂ + ε) with m̂ = m/(1−β1^t), v̂ = v/(1−β2^t). `t` counts from 1.
void adam_step(Tensor& theta, const Tensor& g, Tensor& m, Tensor& v, std::uint64_t t, const OptimizerConfig& config);

/// Per-model optimizer: hyperparameters, step counter and one pair of moment
/// slots per parameter, allocated on the first step with the parameter shapes.
class OptimizerState {
 public:
  explicit OptimizerState(OptimizerConfig config = {});

  // Updates every parameter from its gradient. All gradients are checked before
  // anything is touched; a NaN or infinity throws NonFiniteGradient and leaves
  // parameters, slots and the step counter unchanged.
  void step(std::span<const nn::Param> params);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return t_; }
  const std::vector<Tensor>& first_moments() const { return first_; }
  const std::vector<Tensor>& second_moments() const { return second_; }

  void restore(std::uint64_t steps, std::vector<Tensor> first, std::vector<Tensor> second);

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;

 private:
  OptimizerConfig config_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> first_;   // m, or the momentum velocity
  std::vector<Tensor> second_;  // v
};

}  // namespace rmdl::optim
