#include "rmdl/nn/recurrent.hpp"

#include <cmath>

#include "rmdl/error.hpp"
#include "rmdl/nn/activation.hpp"
#include "rmdl/nn/layers.hpp"

namespace rmdl::nn {

namespace {

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  const std::size_t rows = a.dim(0), na = a.dim(1), nb = b.dim(1);
  Tensor out({rows, na + nb});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(a.raw() + r * na, a.raw() + (r + 1) * na, out.raw() + r * (na + nb));
    std::copy(b.raw() + r * nb, b.raw() + (r + 1) * nb, out.raw() + r * (na + nb) + na);
  }
  return out;
}

// Columns [begin, begin + width) of a rows×cols matrix.
Tensor column_block(const Tensor& a, std::size_t begin, std::size_t width) {
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  Tensor out({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(a.raw() + r * cols + begin, a.raw() + r * cols + begin + width, out.raw() + r * width);
  }
  return out;
}

// x·W + b
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = matmul(x, w);
  const std::size_t cols = y.dim(1);
  for (std::size_t r = 0; r < y.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] += b[c];
  }
  return y;
}

// dW += xᵀ·da, db += Σ_rows da
void accumulate_affine_grads(const Tensor& x, const Tensor& da, Tensor& dw, Tensor& db) {
  gemm_tn_accumulate(x.raw(), da.raw(), dw.raw(), x.dim(1), x.dim(0), da.dim(1));
  const std::size_t cols = da.dim(1);
  for (std::size_t r = 0; r < da.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) db[c] += da[r * cols + c];
  }
}

// out += da·Wᵀ
void accumulate_input_grad(const Tensor& da, const Tensor& w, Tensor& out) {
  gemm_nt_accumulate(da.raw(), w.raw(), out.raw(), da.dim(0), da.dim(1), w.dim(0));
}

void require_step_shapes(const Tensor& x, const Tensor& h, std::size_t in, std::size_t units, const char* cell) {
  if (x.rank() != 2 || h.rank() != 2 || x.dim(0) != h.dim(0) || x.dim(1) != in || h.dim(1) != units) {
    throw ShapeError(std::string(cell) + ": step input " + shape_string(x.shape()) + " / state " +
                     shape_string(h.shape()) + " do not match layer widths");
  }
}

// Row t of a B×T×F sequence as a B×F matrix.
Tensor time_slice(const Tensor& x, std::size_t t) {
  const std::size_t batch = x.dim(0), steps = x.dim(1), feat = x.dim(2);
  Tensor out({batch, feat});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* src = x.raw() + (b * steps + t) * feat;
    std::copy(src, src + feat, out.raw() + b * feat);
  }
  return out;
}

void store_time_slice(Tensor& seq, std::size_t t, const Tensor& slice) {
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), feat = seq.dim(2);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(slice.raw() + b * feat, slice.raw() + (b + 1) * feat, seq.raw() + (b * steps + t) * feat);
  }
}

void require_sequence(const Tensor& x, std::size_t in, const char* layer) {
  if (x.rank() != 3 || x.dim(2) != in) {
    throw ShapeError(std::string(layer) + ": expected B×T×" + std::to_string(in) + " input, got " +
                     shape_string(x.shape()));
  }
}

}  // namespace

// ---- LSTM cell ------------------------------------------------------------

LstmParams LstmParams::zeros(std::size_t in, std::size_t units) {
  const Shape w{in + units, units}, b{units};
  return {Tensor(w), Tensor(w), Tensor(w), Tensor(w), Tensor(b), Tensor(b), Tensor(b), Tensor(b)};
}

std::vector<Param> LstmParams::bind(LstmParams& g) {
  return {{"W_i", &w_i, &g.w_i}, {"W_c", &w_c, &g.w_c}, {"W_f", &w_f, &g.w_f}, {"W_o", &w_o, &g.w_o},
          {"b_i", &b_i, &g.b_i}, {"b_c", &b_c, &g.b_c}, {"b_f", &b_f, &g.b_f}, {"b_o", &b_o, &g.b_o}};
}

LstmStep lstm_step(const Tensor& x_t, const Tensor& h_prev, const Tensor& c_prev, const LstmParams& p) {
  const std::size_t units = p.b_i.size();
  require_step_shapes(x_t, h_prev, p.w_i.dim(0) - units, units, "lstm");
  if (c_prev.shape() != h_prev.shape()) throw ShapeError("lstm: cell state shape differs from hidden state");

  LstmStep out;
  LstmCache& c = out.cache;
  c.xh = concat_cols(x_t, h_prev);
  c.input_gate = sigmoid(affine(c.xh, p.w_i, p.b_i));
  c.candidate = tanh(affine(c.xh, p.w_c, p.b_c));
  c.forget_gate = sigmoid(affine(c.xh, p.w_f, p.b_f));
  c.output_gate = sigmoid(affine(c.xh, p.w_o, p.b_o));
  c.c_prev = c_prev;

  out.c = Tensor(h_prev.shape());
  for (std::size_t i = 0; i < out.c.size(); ++i) {
    out.c[i] = c.input_gate[i] * c.candidate[i] + c.forget_gate[i] * c_prev[i];
  }
  c.tanh_c = tanh(out.c);
  out.h = mul(c.output_gate, c.tanh_c);
  return out;
}

LstmStepGrad lstm_step_backward(const Tensor& dh, const Tensor& dc, const LstmCache& c, const LstmParams& p,
                                LstmParams& g) {
  const std::size_t n = dh.size();
  Tensor da_i(dh.shape()), da_c(dh.shape()), da_f(dh.shape()), da_o(dh.shape());
  Tensor dc_prev(dh.shape());
  for (std::size_t k = 0; k < n; ++k) {
    const double i = c.input_gate[k], cand = c.candidate[k], f = c.forget_gate[k], o = c.output_gate[k];
    const double tc = c.tanh_c[k];
    const double dcell = dc[k] + dh[k] * o * (1.0 - tc * tc);
    da_o[k] = dh[k] * tc * o * (1.0 - o);
    da_i[k] = dcell * cand * i * (1.0 - i);
    da_c[k] = dcell * i * (1.0 - cand * cand);
    da_f[k] = dcell * c.c_prev[k] * f * (1.0 - f);
    dc_prev[k] = dcell * f;
  }

  accumulate_affine_grads(c.xh, da_i, g.w_i, g.b_i);
  accumulate_affine_grads(c.xh, da_c, g.w_c, g.b_c);
  accumulate_affine_grads(c.xh, da_f, g.w_f, g.b_f);
  accumulate_affine_grads(c.xh, da_o, g.w_o, g.b_o);

  Tensor dxh(c.xh.shape());
  accumulate_input_grad(da_i, p.w_i, dxh);
  accumulate_input_grad(da_c, p.w_c, dxh);
  accumulate_input_grad(da_f, p.w_f, dxh);
  accumulate_input_grad(da_o, p.w_o, dxh);

  const std::size_t units = dh.dim(1), in = c.xh.dim(1) - units;
  return {column_block(dxh, 0, in), column_block(dxh, in, units), std::move(dc_prev)};
}

// ---- GRU cell -------------------------------------------------------------

GruParams GruParams::zeros(std::size_t in, std::size_t units) {
  const Shape w{in, units}, u{units, units}, b{units};
  return {Tensor(w), Tensor(w), Tensor(w), Tensor(u), Tensor(u), Tensor(u), Tensor(b), Tensor(b), Tensor(b)};
}

std::vector<Param> GruParams::bind(GruParams& g) {
  return {{"W_z", &w_z, &g.w_z}, {"W_r", &w_r, &g.w_r}, {"W_h", &w_h, &g.w_h},
          {"U_z", &u_z, &g.u_z}, {"U_r", &u_r, &g.u_r}, {"U_h", &u_h, &g.u_h},
          {"b_z", &b_z, &g.b_z}, {"b_r", &b_r, &g.b_r}, {"b_h", &b_h, &g.b_h}};
}

GruStep gru_step(const Tensor& x_t, const Tensor& h_prev, const GruParams& p) {
  require_step_shapes(x_t, h_prev, p.w_z.dim(0), p.b_z.size(), "gru");
  GruStep out;
  GruCache& c = out.cache;
  c.x = x_t;
  c.h_prev = h_prev;

  Tensor az = affine(x_t, p.w_z, p.b_z);
  gemm_accumulate(h_prev.raw(), p.u_z.raw(), az.raw(), h_prev.dim(0), h_prev.dim(1), p.u_z.dim(1));
  c.update_gate = sigmoid(az);

  Tensor ar = affine(x_t, p.w_r, p.b_r);
  gemm_accumulate(h_prev.raw(), p.u_r.raw(), ar.raw(), h_prev.dim(0), h_prev.dim(1), p.u_r.dim(1));
  c.reset_gate = sigmoid(ar);

  c.reset_h = mul(c.reset_gate, h_prev);
  Tensor ah = affine(x_t, p.w_h, p.b_h);
  gemm_accumulate(c.reset_h.raw(), p.u_h.raw(), ah.raw(), h_prev.dim(0), h_prev.dim(1), p.u_h.dim(1));
  c.candidate = tanh(ah);

  out.h = Tensor(h_prev.shape());
  for (std::size_t k = 0; k < out.h.size(); ++k) {
    const double z = c.update_gate[k];
    out.h[k] = z * h_prev[k] + (1.0 - z) * c.candidate[k];
  }
  return out;
}

GruStepGrad gru_step_backward(const Tensor& dh, const GruCache& c, const GruParams& p, GruParams& g) {
  const std::size_t n = dh.size();
  Tensor da_z(dh.shape()), da_h(dh.shape());
  Tensor dh_prev(dh.shape());
  for (std::size_t k = 0; k < n; ++k) {
    const double z = c.update_gate[k], cand = c.candidate[k];
    da_z[k] = dh[k] * (c.h_prev[k] - cand) * z * (1.0 - z);
    da_h[k] = dh[k] * (1.0 - z) * (1.0 - cand * cand);
    dh_prev[k] = dh[k] * z;
  }

  accumulate_affine_grads(c.x, da_h, g.w_h, g.b_h);
  gemm_tn_accumulate(c.reset_h.raw(), da_h.raw(), g.u_h.raw(), c.reset_h.dim(1), c.reset_h.dim(0), da_h.dim(1));
  Tensor d_reset_h(dh.shape());
  accumulate_input_grad(da_h, p.u_h, d_reset_h);

  Tensor da_r(dh.shape());
  for (std::size_t k = 0; k < n; ++k) {
    const double r = c.reset_gate[k];
    da_r[k] = d_reset_h[k] * c.h_prev[k] * r * (1.0 - r);
    dh_prev[k] += d_reset_h[k] * r;
  }

  accumulate_affine_grads(c.x, da_z, g.w_z, g.b_z);
  accumulate_affine_grads(c.x, da_r, g.w_r, g.b_r);
  gemm_tn_accumulate(c.h_prev.raw(), da_z.raw(), g.u_z.raw(), c.h_prev.dim(1), c.h_prev.dim(0), da_z.dim(1));
  gemm_tn_accumulate(c.h_prev.raw(), da_r.raw(), g.u_r.raw(), c.h_prev.dim(1), c.h_prev.dim(0), da_r.dim(1));

  accumulate_input_grad(da_z, p.u_z, dh_prev);
  accumulate_input_grad(da_r, p.u_r, dh_prev);

  Tensor dx(c.x.shape());
  accumulate_input_grad(da_z, p.w_z, dx);
  accumulate_input_grad(da_r, p.w_r, dx);
  accumulate_input_grad(da_h, p.w_h, dx);
  return {std::move(dx), std::move(dh_prev)};
}

// ---- LSTM layer -----------------------------------------------------------

Lstm::Lstm(std::size_t in, std::size_t units, bool return_sequences)
    : in_(in),
      units_(units),
      return_sequences_(return_sequences),
      p_(LstmParams::zeros(in, units)),
      g_(LstmParams::zeros(in, units)) {}

void Lstm::initialize(Rng& rng) {
  for (Tensor* w : {&p_.w_i, &p_.w_c, &p_.w_f, &p_.w_o}) glorot_uniform(*w, in_ + units_, units_, rng);
  for (Tensor* b : {&p_.b_i, &p_.b_c, &p_.b_o}) b->fill(0.0);
  p_.b_f.fill(1.0);
}

Tensor Lstm::forward(const Tensor& x, Mode) {
  require_sequence(x, in_, "lstm");
  const std::size_t batch = x.dim(0), steps = x.dim(1);
  Tensor h({batch, units_}), c({batch, units_});
  Tensor seq = return_sequences_ ? Tensor({batch, steps, units_}) : Tensor();
  steps_.clear();
  steps_.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    LstmStep s = lstm_step(time_slice(x, t), h, c, p_);
    h = std::move(s.h);
    c = std::move(s.c);
    steps_.push_back(std::move(s.cache));
    if (return_sequences_) store_time_slice(seq, t, h);
  }
  in_shape_ = x.shape();
  guard_.arm();
  return return_sequences_ ? seq : h;
}

Tensor Lstm::backward(const Tensor& grad_out) {
  guard_.consume("lstm");
  const std::size_t batch = in_shape_[0], steps = in_shape_[1];
  Tensor dx(in_shape_);
  Tensor dh({batch, units_}), dc({batch, units_});
  if (!return_sequences_) dh = grad_out;
  for (std::size_t t = steps; t-- > 0;) {
    if (return_sequences_) dh += time_slice(grad_out, t);
    LstmStepGrad sg = lstm_step_backward(dh, dc, steps_[t], p_, g_);
    store_time_slice(dx, t, sg.dx);
    dh = std::move(sg.dh_prev);
    dc = std::move(sg.dc_prev);
  }
  steps_.clear();
  return dx;
}

// ---- GRU layer ------------------------------------------------------------

Gru::Gru(std::size_t in, std::size_t units, bool return_sequences)
    : in_(in),
      units_(units),
      return_sequences_(return_sequences),
      p_(GruParams::zeros(in, units)),
      g_(GruParams::zeros(in, units)) {}

void Gru::initialize(Rng& rng) {
  for (Tensor* w : {&p_.w_z, &p_.w_r, &p_.w_h}) glorot_uniform(*w, in_, units_, rng);
  for (Tensor* u : {&p_.u_z, &p_.u_r, &p_.u_h}) glorot_uniform(*u, units_, units_, rng);
  for (Tensor* b : {&p_.b_z, &p_.b_r, &p_.b_h}) b->fill(0.0);
}

Tensor Gru::forward(const Tensor& x, Mode) {
  require_sequence(x, in_, "gru");
  const std::size_t batch = x.dim(0), steps = x.dim(1);
  Tensor h({batch, units_});
  Tensor seq = return_sequences_ ? Tensor({batch, steps, units_}) : Tensor();
  steps_.clear();
  steps_.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    GruStep s = gru_step(time_slice(x, t), h, p_);
    h = std::move(s.h);
    steps_.push_back(std::move(s.cache));
    if (return_sequences_) store_time_slice(seq, t, h);
  }
  in_shape_ = x.shape();
  guard_.arm();
  return return_sequences_ ? seq : h;
}

Tensor Gru::backward(const Tensor& grad_out) {
  guard_.consume("gru");
  const std::size_t batch = in_shape_[0], steps = in_shape_[1];
  Tensor dx(in_shape_);
  Tensor dh({batch, units_});
  if (!return_sequences_) dh = grad_out;
  for (std::size_t t = steps; t-- > 0;) {
    if (return_sequences_) dh += time_slice(grad_out, t);
    GruStepGrad sg = gru_step_backward(dh, steps_[t], p_, g_);
    store_time_slice(dx, t, sg.dx);
    dh = std::move(sg.dh_prev);
  }
  steps_.clear();
  return dx;
}

}  // namespace rmdl::nn
