#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rmdl {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// A default-constructed tensor is empty (rank 0, no elements) and only
/// serves as a placeholder; every constructed tensor has extents >= 1.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor from_values(Shape shape, std::vector<double> values) {
    return Tensor(std::move(shape), std::move(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  // Bounds-checked multi-index access.
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  // Same data, new shape with the same element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  // Sub-tensor along the leading axis: rows [begin, end).
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  void fill(double value);

  // In-place updates; reserved for parameter and gradient owners.
  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double scale);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

enum class BinaryOp { add, sub, mul, div, max };
enum class ReduceOp { sum, max, argmax };

// c = a·b for a: m×k, b: k×n.
Tensor matmul(const Tensor& a, const Tensor& b);
// aᵀ·b for a: k×m, b: k×n.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a·bᵀ for a: m×k, b: n×k.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// c[i][j] += Σ_p a[i][p]·b[p][j], summed in increasing p. Zero entries of `a`
// are skipped, which makes sparse left operands cheap.
void gemm_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                     std::size_t n);
// c (m×n) += aᵀ·b with a: k×m, b: k×n; summed in increasing p, zeros of `a` skipped.
void gemm_tn_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                        std::size_t n);
// c (m×n) += a·bᵀ with a: m×k, b: n×k; each entry is one left-to-right dot product.
void gemm_nt_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                        std::size_t n);

Tensor ew(BinaryOp op, const Tensor& a, const Tensor& b);
Tensor ew(BinaryOp op, const Tensor& a, double b);

inline Tensor add(const Tensor& a, const Tensor& b) { return ew(BinaryOp::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return ew(BinaryOp::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return ew(BinaryOp::mul, a, b); }
inline Tensor div(const Tensor& a, const Tensor& b) { return ew(BinaryOp::div, a, b); }
inline Tensor maximum(const Tensor& a, const Tensor& b) { return ew(BinaryOp::max, a, b); }

// Reduces along `axis`, removing it from the shape (a rank-1 input yields shape {1}).
// argmax returns indices stored as doubles; ties resolve to the lowest index.
Tensor reduce(ReduceOp op, const Tensor& a, std::size_t axis);
// Left-to-right sum over the flat data.
double sum(const Tensor& a);

// Row-wise argmax of a rank-2 tensor.
std::vector<std::size_t> argmax_rows(const Tensor& a);

bool all_finite(const Tensor& a);

}  // namespace rmdl
