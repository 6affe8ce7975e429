#include "rmdl/nn/layers.hpp"

#include <cmath>

#include "rmdl/error.hpp"

namespace rmdl::nn {

namespace {

void require_rank(const Tensor& x, std::size_t rank, const char* layer) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(layer) + ": expected rank " + std::to_string(rank) + " input, got " +
                     shape_string(x.shape()));
  }
}

// Adds column sums of a rows×cols matrix into `out`.
void accumulate_column_sums(const Tensor& g, std::size_t rows, std::size_t cols, Tensor& out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = g.raw() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c];
  }
}

void add_bias_rows(Tensor& y, const Tensor& b, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = y.raw() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += b[c];
  }
}

}  // namespace

void glorot_uniform(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : w.data()) x = rng.uniform(-limit, limit);
}

std::size_t valid_extent(std::size_t n, std::size_t k, std::size_t stride) {
  if (stride == 0) throw ShapeError("stride must be >= 1");
  if (k == 0 || k > n) {
    throw ShapeError("window of " + std::to_string(k) + " does not fit extent " + std::to_string(n));
  }
  return (n - k) / stride + 1;
}

// ---- Dense ----------------------------------------------------------------

Dense::Dense(std::size_t in, std::size_t out)
    : w_({in, out}), b_({out}), dw_({in, out}), db_({out}) {}

void Dense::initialize(Rng& rng) {
  glorot_uniform(w_, w_.dim(0), w_.dim(1), rng);
  b_.fill(0.0);
}

std::vector<Param> Dense::params() { return {{"W", &w_, &dw_}, {"b", &b_, &db_}}; }

Tensor Dense::forward(const Tensor& x, Mode) {
  require_rank(x, 2, "dense");
  if (x.dim(1) != w_.dim(0)) {
    throw ShapeError("dense: input width " + std::to_string(x.dim(1)) + " != " + std::to_string(w_.dim(0)));
  }
  Tensor y = matmul(x, w_);
  add_bias_rows(y, b_, x.dim(0), w_.dim(1));
  x_ = x;
  guard_.arm();
  return y;
}

Tensor Dense::backward(const Tensor& grad_out) {
  guard_.consume("dense");
  gemm_tn_accumulate(x_.raw(), grad_out.raw(), dw_.raw(), x_.dim(1), x_.dim(0), grad_out.dim(1));
  accumulate_column_sums(grad_out, grad_out.dim(0), grad_out.dim(1), db_);
  if (!input_grad_needed_) return {};
  return matmul_nt(grad_out, w_);
}

// ---- Conv2D ---------------------------------------------------------------

Conv2D::Conv2D(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride)
    : channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      stride_(stride),
      w_({kernel * kernel * in_channels, filters}),
      b_({filters}),
      dw_({kernel * kernel * in_channels, filters}),
      db_({filters}) {
  if (stride == 0) throw ShapeError("conv2d: stride must be >= 1");
}

void Conv2D::initialize(Rng& rng) {
  glorot_uniform(w_, kernel_ * kernel_ * channels_, kernel_ * kernel_ * filters_, rng);
  b_.fill(0.0);
}

std::vector<Param> Conv2D::params() { return {{"W", &w_, &dw_}, {"b", &b_, &db_}}; }

Tensor Conv2D::forward(const Tensor& x, Mode) {
  require_rank(x, 4, "conv2d");
  if (x.dim(3) != channels_) throw ShapeError("conv2d: channel count mismatch");
  const std::size_t batch = x.dim(0), height = x.dim(1), width = x.dim(2);
  const std::size_t out_h = valid_extent(height, kernel_, stride_);
  const std::size_t out_w = valid_extent(width, kernel_, stride_);
  const std::size_t patch = kernel_ * kernel_ * channels_;

  cols_ = Tensor({batch * out_h * out_w, patch});
  double* col = cols_.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oi = 0; oi < out_h; ++oi) {
      for (std::size_t oj = 0; oj < out_w; ++oj) {
        for (std::size_t di = 0; di < kernel_; ++di) {
          const double* src = x.raw() + ((b * height + oi * stride_ + di) * width + oj * stride_) * channels_;
          for (std::size_t k = 0; k < kernel_ * channels_; ++k) *col++ = src[k];
        }
      }
    }
  }
  Tensor y = matmul(cols_, w_);
  add_bias_rows(y, b_, y.dim(0), filters_);
  in_shape_ = x.shape();
  guard_.arm();
  return std::move(y).reshaped({batch, out_h, out_w, filters_});
}

Tensor Conv2D::backward(const Tensor& grad_out) {
  guard_.consume("conv2d");
  const std::size_t rows = cols_.dim(0);
  const Tensor g = grad_out.reshaped({rows, filters_});
  gemm_tn_accumulate(cols_.raw(), g.raw(), dw_.raw(), cols_.dim(1), rows, filters_);
  accumulate_column_sums(g, rows, filters_, db_);
  if (!input_grad_needed_) return {};
  const Tensor dcols = matmul_nt(g, w_);

  const std::size_t batch = in_shape_[0], height = in_shape_[1], width = in_shape_[2];
  const std::size_t out_h = grad_out.dim(1), out_w = grad_out.dim(2);
  Tensor dx(in_shape_);
  const double* col = dcols.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oi = 0; oi < out_h; ++oi) {
      for (std::size_t oj = 0; oj < out_w; ++oj) {
        for (std::size_t di = 0; di < kernel_; ++di) {
          double* dst = dx.raw() + ((b * height + oi * stride_ + di) * width + oj * stride_) * channels_;
          for (std::size_t k = 0; k < kernel_ * channels_; ++k) dst[k] += *col++;
        }
      }
    }
  }
  return dx;
}

// ---- Conv1D ---------------------------------------------------------------

Conv1D::Conv1D(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride)
    : channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      stride_(stride),
      w_({kernel * in_channels, filters}),
      b_({filters}),
      dw_({kernel * in_channels, filters}),
      db_({filters}) {
  if (stride == 0) throw ShapeError("conv1d: stride must be >= 1");
}

void Conv1D::initialize(Rng& rng) {
  glorot_uniform(w_, kernel_ * channels_, kernel_ * filters_, rng);
  b_.fill(0.0);
}

std::vector<Param> Conv1D::params() { return {{"W", &w_, &dw_}, {"b", &b_, &db_}}; }

Tensor Conv1D::forward(const Tensor& x, Mode) {
  require_rank(x, 3, "conv1d");
  if (x.dim(2) != channels_) throw ShapeError("conv1d: channel count mismatch");
  const std::size_t batch = x.dim(0), length = x.dim(1);
  const std::size_t out_l = valid_extent(length, kernel_, stride_);
  const std::size_t patch = kernel_ * channels_;

  cols_ = Tensor({batch * out_l, patch});
  double* col = cols_.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_l; ++o) {
      const double* src = x.raw() + (b * length + o * stride_) * channels_;
      for (std::size_t k = 0; k < patch; ++k) *col++ = src[k];
    }
  }
  Tensor y = matmul(cols_, w_);
  add_bias_rows(y, b_, y.dim(0), filters_);
  in_shape_ = x.shape();
  guard_.arm();
  return std::move(y).reshaped({batch, out_l, filters_});
}

Tensor Conv1D::backward(const Tensor& grad_out) {
  guard_.consume("conv1d");
  const std::size_t rows = cols_.dim(0);
  const Tensor g = grad_out.reshaped({rows, filters_});
  gemm_tn_accumulate(cols_.raw(), g.raw(), dw_.raw(), cols_.dim(1), rows, filters_);
  accumulate_column_sums(g, rows, filters_, db_);
  if (!input_grad_needed_) return {};
  const Tensor dcols = matmul_nt(g, w_);

  const std::size_t batch = in_shape_[0], length = in_shape_[1];
  const std::size_t out_l = grad_out.dim(1), patch = kernel_ * channels_;
  Tensor dx(in_shape_);
  const double* col = dcols.raw();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_l; ++o) {
      double* dst = dx.raw() + (b * length + o * stride_) * channels_;
      for (std::size_t k = 0; k < patch; ++k) dst[k] += *col++;
    }
  }
  return dx;
}

// ---- MaxPool --------------------------------------------------------------

MaxPool::MaxPool(std::size_t window, std::size_t stride) : window_(window), stride_(stride) {
  if (window == 0 || stride == 0) throw ShapeError("maxpool: window and stride must be >= 1");
}

Tensor MaxPool::forward(const Tensor& x, Mode) {
  if (x.rank() != 3 && x.rank() != 4) throw ShapeError("maxpool: expected B×L×C or B×H×W×C input");
  const bool two_d = x.rank() == 4;
  const std::size_t batch = x.dim(0);
  const std::size_t height = x.dim(1);
  const std::size_t width = two_d ? x.dim(2) : 1;
  const std::size_t channels = x.shape().back();
  const std::size_t win_w = two_d ? window_ : 1;
  const std::size_t out_h = valid_extent(height, window_, stride_);
  const std::size_t out_w = two_d ? valid_extent(width, window_, stride_) : 1;

  Tensor y(two_d ? Shape{batch, out_h, out_w, channels} : Shape{batch, out_h, channels});
  argmax_.assign(y.size(), 0);
  std::size_t out = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oi = 0; oi < out_h; ++oi) {
      for (std::size_t oj = 0; oj < out_w; ++oj) {
        for (std::size_t c = 0; c < channels; ++c, ++out) {
          std::size_t best = ((b * height + oi * stride_) * width + oj * stride_) * channels + c;
          for (std::size_t di = 0; di < window_; ++di) {
            for (std::size_t dj = 0; dj < win_w; ++dj) {
              const std::size_t idx = ((b * height + oi * stride_ + di) * width + oj * stride_ + dj) * channels + c;
              if (x[idx] > x[best]) best = idx;
            }
          }
          y[out] = x[best];
          argmax_[out] = best;
        }
      }
    }
  }
  in_shape_ = x.shape();
  guard_.arm();
  return y;
}

Tensor MaxPool::backward(const Tensor& grad_out) {
  guard_.consume("maxpool");
  Tensor dx(in_shape_);
  for (std::size_t i = 0; i < grad_out.size(); ++i) dx[argmax_[i]] += grad_out[i];
  return dx;
}

// ---- Reshape / Flatten ----------------------------------------------------

Tensor Reshape::forward(const Tensor& x, Mode) {
  Shape shape{x.dim(0)};
  shape.insert(shape.end(), sample_shape_.begin(), sample_shape_.end());
  in_shape_ = x.shape();
  guard_.arm();
  return x.reshaped(std::move(shape));
}

Tensor Reshape::backward(const Tensor& grad_out) {
  guard_.consume("reshape");
  return grad_out.reshaped(in_shape_);
}

Tensor Flatten::forward(const Tensor& x, Mode) {
  in_shape_ = x.shape();
  guard_.arm();
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

// ---- Dropout --------------------------------------------------------------

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
}

Tensor dropout_apply(const Tensor& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout rate must lie in [0, 1)");
  if (mode == Mode::eval || rate == 0.0) return x;
  const double scale = 1.0 / (1.0 - rate);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = rng.bernoulli(rate) ? 0.0 : x[i] * scale;
  return y;
}

Tensor Dropout::forward(const Tensor& x, Mode mode) {
  guard_.arm();
  masked_ = mode == Mode::train && rate_ > 0.0;
  if (!masked_) return x;
  mask_ = dropout_apply(Tensor::ones(x.shape()), rate_, mode, rng_);
  return mul(x, mask_);
}

Tensor Dropout::backward(const Tensor& grad_out) {
  guard_.consume("dropout");
  return masked_ ? mul(grad_out, mask_) : grad_out;
}

// ---- Embedding ------------------------------------------------------------

Embedding::Embedding(std::size_t vocab_size, std::size_t dim) : table_({vocab_size, dim}), dtable_({vocab_size, dim}) {}

void Embedding::initialize(Rng& rng) {
  glorot_uniform(table_, table_.dim(0), table_.dim(1), rng);
  for (std::size_t j = 0; j < dim(); ++j) table_[j] = 0.0;
}

std::vector<Param> Embedding::params() { return {{"E", &table_, &dtable_}}; }

Tensor Embedding::forward(const Tensor& x, Mode) {
  require_rank(x, 2, "embedding");
  const std::size_t d = dim();
  indices_.resize(x.size());
  Tensor y({x.dim(0), x.dim(1), d});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(vocab_size())) {
      throw ShapeError("embedding: token index " + std::to_string(v) + " outside vocabulary of " +
                       std::to_string(vocab_size()));
    }
    const auto idx = static_cast<std::size_t>(v);
    indices_[i] = idx;
    if (idx == 0) continue;
    const double* row = table_.raw() + idx * d;
    std::copy(row, row + d, y.raw() + i * d);
  }
  in_shape_ = x.shape();
  guard_.arm();
  return y;
}

Tensor Embedding::backward(const Tensor& grad_out) {
  guard_.consume("embedding");
  const std::size_t d = dim();
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] == 0) continue;
    double* row = dtable_.raw() + indices_[i] * d;
    const double* g = grad_out.raw() + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] += g[j];
  }
  // Indices are discrete; nothing flows further back.
  return Tensor(in_shape_);
}

}  // namespace rmdl::nn
