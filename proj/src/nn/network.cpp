#include "rmdl/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "rmdl/error.hpp"

namespace rmdl::nn {

LossResult loss_ce(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("loss_ce: logits must be B×K");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) throw ShapeError("loss_ce: label count differs from batch size");

  LossResult out{0.0, Tensor(logits.shape())};
  const double scale = 1.0 / static_cast<double>(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw DomainError("loss_ce: label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
    const double* z = logits.raw() + r * classes;
    double* g = out.grad.raw() + r * classes;
    const double peak = *std::max_element(z, z + classes);
    double total = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      g[j] = std::exp(z[j] - peak);
      total += g[j];
    }
    out.loss += (std::log(total) + peak - z[label]) * scale;
    for (std::size_t j = 0; j < classes; ++j) g[j] = g[j] / total * scale;
    g[label] -= scale;
  }
  return out;
}

Network::Network(const Network& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) *this = Network(other);
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Tensor Network::forward(const Tensor& x, Mode mode) {
  if (layers_.empty()) throw Error("network has no layers");
  Tensor h = layers_.front()->forward(x, mode);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  return h;
}

void Network::backward(const Tensor& grad_logits) {
  std::size_t first = 0;
  while (first < layers_.size() && layers_[first]->params().empty()) ++first;
  if (first == layers_.size()) return;
  for (std::size_t i = first; i < layers_.size(); ++i) layers_[i]->set_input_grad_needed(i != first);

  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > first;) g = layers_[i]->backward(g);
}

void Network::zero_grad() {
  for (auto& layer : layers_) layer->zero_grad();
}

std::vector<Param> Network::params() {
  std::vector<Param> all;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& p : layers_[i]->params()) {
      p.name = std::to_string(i) + "." + p.name;
      all.push_back(std::move(p));
    }
  }
  return all;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : params()) n += p.value->size();
  return n;
}

}  // namespace rmdl::nn
