#pragma once

#include <cstdint>

#include "rmdl/nn/layer.hpp"
#include "rmdl/random.hpp"

namespace rmdl::nn {

// Row-vector convention throughout: x_t is B×in, h is B×H, and each gate's
// weight W_g acts on the concatenation [x_t, h_{t-1}] as a (in+H)×H matrix.
struct LstmParams {
  Tensor w_i, w_c, w_f, w_o;
  Tensor b_i, b_c, b_f, b_o;

  static LstmParams zeros(std::size_t in, std::size_t units);
  std::vector<Param> bind(LstmParams& grads);
};

struct LstmCache {
  Tensor xh;  // [x_t, h_{t-1}]
  Tensor input_gate, candidate, forget_gate, output_gate;
  Tensor c_prev, tanh_c;
};

struct LstmStep {
  Tensor h;
  Tensor c;
  LstmCache cache;
};

struct LstmStepGrad {
  Tensor dx, dh_prev, dc_prev;
};

// i = σ(W_i[x,h]+b_i), C̃ = tanh(W_c[x,h]+b_c), f = σ(W_f[x,h]+b_f),
// C = i∘C̃ + f∘C_prev, o = σ(W_o[x,h]+b_o), h = o∘tanh(C).
LstmStep lstm_step(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& p);

// Backward through one step given dL/dh_t and dL/dC_t (from the next step);
// parameter gradients are added into `grads`.
LstmStepGrad lstm_step_backward(const Tensor& dh, const Tensor& dc, const LstmCache& cache, const LstmParams& p,
                                LstmParams& grads);

struct GruParams {
  Tensor w_z, w_r, w_h;  // in×H
  Tensor u_z, u_r, u_h;  // H×H
  Tensor b_z, b_r, b_h;

  static GruParams zeros(std::size_t in, std::size_t units);
  std::vector<Param> bind(GruParams& grads);
};

struct GruCache {
  Tensor x, h_prev;
  Tensor update_gate, reset_gate, candidate, reset_h;
};

struct GruStep {
  Tensor h;
  GruCache cache;
};

struct GruStepGrad {
  Tensor dx, dh_prev;
};

// z = σ(xW_z + hU_z + b_z), r = σ(xW_r + hU_r + b_r),
// h' = z∘h + (1-z)∘tanh(xW_h + (r∘h)U_h + b_h).
GruStep gru_step(const Tensor& x_t, const Tensor& h_prev, const GruParams& p);
GruStepGrad gru_step_backward(const Tensor& dh, const GruCache& cache, const GruParams& p, GruParams& grads);

/// LSTM unrolled over B×T×F input with zero initial state and full BPTT.
/// Emits B×T×H when `return_sequences`, otherwise the last hidden state B×H.
class Lstm final : public Layer {
 public:
  Lstm(std::size_t in, std::size_t units, bool return_sequences);

  LayerKind kind() const override { return LayerKind::lstm; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }
  std::vector<Param> params() override { return p_.bind(g_); }

  // Glorot weights, zero biases except the forget gate at 1.
  void initialize(Rng& rng);

  std::size_t units() const { return units_; }
  bool return_sequences() const { return return_sequences_; }
  LstmParams& weights() { return p_; }

 private:
  std::size_t in_, units_;
  bool return_sequences_;
  LstmParams p_, g_;
  std::vector<LstmCache> steps_;
  Shape in_shape_;
  CacheGuard guard_;
};

/// GRU counterpart of Lstm.
class Gru final : public Layer {
 public:
  Gru(std::size_t in, std::size_t units, bool return_sequences);

  LayerKind kind() const override { return LayerKind::gru; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Gru>(*this); }
  std::vector<Param> params() override { return p_.bind(g_); }

  void initialize(Rng& rng);

  std::size_t units() const { return units_; }
  bool return_sequences() const { return return_sequences_; }
  GruParams& weights() { return p_; }

 private:
  std::size_t in_, units_;
  bool return_sequences_;
  GruParams p_, g_;
  std::vector<GruCache> steps_;
  Shape in_shape_;
  CacheGuard guard_;
};

}  // namespace rmdl::nn
