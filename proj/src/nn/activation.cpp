#include "rmdl/nn/activation.hpp"

#include <algorithm>
#include <cmath>

#include "rmdl/error.hpp"

namespace rmdl::nn {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
  return y;
}

Tensor tanh(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Tensor softmax(const Tensor& z) {
  const std::size_t k = z.shape().back();
  const std::size_t rows = z.size() / k;
  Tensor y(z.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = z.raw() + r * k;
    double* out = y.raw() + r * k;
    const double peak = *std::max_element(in, in + k);
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(in[j] - peak);
      total += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= total;
  }
  return y;
}

Tensor Sigmoid::forward(const Tensor& x, Mode) {
  y_ = sigmoid(x);
  guard_.arm();
  return y_;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
  guard_.consume("sigmoid");
  Tensor g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * y_[i] * (1.0 - y_[i]);
  return g;
}

Tensor ReLU::forward(const Tensor& x, Mode) {
  x_ = x;
  guard_.arm();
  return relu(x);
}

Tensor ReLU::backward(const Tensor& grad_out) {
  guard_.consume("relu");
  Tensor g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = x_[i] > 0.0 ? grad_out[i] : 0.0;
  return g;
}

Tensor Tanh::forward(const Tensor& x, Mode) {
  y_ = tanh(x);
  guard_.arm();
  return y_;
}

Tensor Tanh::backward(const Tensor& grad_out) {
  guard_.consume("tanh");
  Tensor g(grad_out.shape());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = grad_out[i] * (1.0 - y_[i] * y_[i]);
  return g;
}

Tensor Softmax::forward(const Tensor& x, Mode) {
  y_ = softmax(x);
  guard_.arm();
  return y_;
}

Tensor Softmax::backward(const Tensor& grad_out) {
  guard_.consume("softmax");
  const std::size_t k = y_.shape().back();
  const std::size_t rows = y_.size() / k;
  Tensor g(y_.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* y = y_.raw() + r * k;
    const double* go = grad_out.raw() + r * k;
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += go[j] * y[j];
    for (std::size_t j = 0; j < k; ++j) g[r * k + j] = y[j] * (go[j] - dot);
  }
  return g;
}

}  // namespace rmdl::nn
