#include "rmdl/optim.hpp"

#include <cmath>
#include <string>

#include "rmdl/error.hpp"

namespace rmdl::optim {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": parameter " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::momentum: return "momentum";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "unknown";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  for (auto kind : {OptimizerKind::sgd, OptimizerKind::momentum, OptimizerKind::rmsprop, OptimizerKind::adam}) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError("unknown optimizer '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  c.learning_rate = (kind == OptimizerKind::sgd || kind == OptimizerKind::momentum) ? 1e-2 : 1e-3;
  return c;
}

void sgd_step(Tensor& theta, const Tensor& g, double learning_rate) {
  require_same_shape(theta, g, "sgd");
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= learning_rate * g[i];
}

void momentum_step(Tensor& theta, const Tensor& g, Tensor& velocity, double learning_rate, double gamma) {
  require_same_shape(theta, g, "momentum");
  require_same_shape(theta, velocity, "momentum");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    velocity[i] = gamma * velocity[i] + learning_rate * g[i];
    theta[i] -= velocity[i];
  }
}

void rmsprop_step(Tensor& theta, const Tensor& g, Tensor& v, double learning_rate, double rho, double epsilon) {
  require_same_shape(theta, g, "rmsprop");
  require_same_shape(theta, v, "rmsprop");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    v[i] = rho * v[i] + (1.0 - rho) * g[i] * g[i];
    theta[i] -= learning_rate * g[i] / (std::sqrt(v[i]) + epsilon);
  }
}

void adam_step(Tensor& theta, const Tensor& g, Tensor& m, Tensor& v, std::uint64_t t, const OptimizerConfig& c) {
  require_same_shape(theta, g, "adam");
  require_same_shape(theta, m, "adam");
  require_same_shape(theta, v, "adam");
  if (t == 0) throw DomainError("adam: step counter starts at 1");
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

OptimizerState::OptimizerState(OptimizerConfig config) : config_(config) {
  if (!(config.learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw DomainError("beta1 and beta2 must lie in [0, 1)");
  }
  if (!(config.epsilon > 0.0)) throw DomainError("epsilon must be > 0");
}

void OptimizerState::step(std::span<const nn::Param> params) {
  for (const auto& p : params) {
    require_same_shape(*p.value, *p.grad, "optimizer");
    if (!all_finite(*p.grad)) throw NonFiniteGradient("non-finite gradient for parameter " + p.name);
  }
  if (first_.empty()) {
    for (const auto& p : params) {
      first_.emplace_back(p.value->shape());
      second_.emplace_back(p.value->shape());
    }
  }
  if (first_.size() != params.size()) throw ShapeError("optimizer: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) require_same_shape(*params[i].value, first_[i], "optimizer slot");

  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& theta = *params[i].value;
    const Tensor& g = *params[i].grad;
    switch (config_.kind) {
      case OptimizerKind::sgd: sgd_step(theta, g, config_.learning_rate); break;
      case OptimizerKind::momentum: momentum_step(theta, g, first_[i], config_.learning_rate, config_.momentum); break;
      case OptimizerKind::rmsprop:
        rmsprop_step(theta, g, second_[i], config_.learning_rate, config_.rho, config_.epsilon);
        break;
      case OptimizerKind::adam: adam_step(theta, g, first_[i], second_[i], t_, config_); break;
    }
  }
}

void OptimizerState::restore(std::uint64_t steps, std::vector<Tensor> first, std::vector<Tensor> second) {
  if (first.size() != second.size()) throw ShapeError("optimizer restore: slot counts differ");
  t_ = steps;
  first_ = std::move(first);
  second_ = std::move(second);
}

}  // namespace rmdl::optim
