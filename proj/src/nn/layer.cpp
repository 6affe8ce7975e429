#include "rmdl/nn/layer.hpp"

#include <array>
#include <utility>

#include "rmdl/error.hpp"

namespace rmdl::nn {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 14> kLayerNames{{
    {LayerKind::dense, "dense"},
    {LayerKind::sigmoid, "sigmoid"},
    {LayerKind::relu, "relu"},
    {LayerKind::tanh, "tanh"},
    {LayerKind::softmax, "softmax"},
    {LayerKind::conv1d, "conv1d"},
    {LayerKind::conv2d, "conv2d"},
    {LayerKind::maxpool, "maxpool"},
    {LayerKind::flatten, "flatten"},
    {LayerKind::reshape, "reshape"},
    {LayerKind::dropout, "dropout"},
    {LayerKind::embedding, "embedding"},
    {LayerKind::lstm, "lstm"},
    {LayerKind::gru, "gru"},
}};

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kLayerNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kLayerNames) {
    if (n == name) return k;
  }
  throw DomainError("unknown layer kind '" + std::string(name) + "'");
}

void CacheGuard::consume(std::string_view layer) {
  if (!armed_) throw Error(std::string(layer) + ": backward called without a cached forward pass");
  armed_ = false;
}

}  // namespace rmdl::nn
