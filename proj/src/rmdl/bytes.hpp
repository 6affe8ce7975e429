#pragma once

// Little-endian byte buffers for the checkpoint container.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "rmdl/error.hpp"
#include "rmdl/tensor.hpp"

namespace rmdl::detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size(std::size_t v) { u64(v); }
  void boolean(bool v) { u8(v ? 1 : 0); }
  void str(std::string_view s) {
    size(s.size());
    buf_.append(s);
  }
  void tensor(const Tensor& t) {
    size(t.rank());
    for (std::size_t d : t.shape()) size(d);
    for (double v : t.data()) f64(v);
  }
  template <typename T, typename Fn>
  void list(const std::vector<T>& items, Fn&& write_one) {
    size(items.size());
    for (const auto& item : items) write_one(item);
  }

  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string context) : bytes_(bytes), context_(std::move(context)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  // Sizes are bounded by the bytes left so a corrupt length cannot trigger a huge allocation.
  std::size_t size() {
    const std::uint64_t v = u64();
    if (v > bytes_.size()) throw FormatError(context_ + ": implausible length " + std::to_string(v));
    return static_cast<std::size_t>(v);
  }
  bool boolean() {
    const auto v = u8();
    if (v > 1) throw FormatError(context_ + ": bad boolean");
    return v == 1;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string str() { return std::string(raw(size())); }
  Tensor tensor() {
    const std::size_t rank = size();
    Shape shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = size();
      if (d == 0) throw FormatError(context_ + ": zero tensor extent");
      total *= d;
      if (total > bytes_.size()) throw FormatError(context_ + ": implausible tensor size");
    }
    Tensor t(shape);
    for (auto& v : t.data()) v = f64();
    return t;
  }
  template <typename T, typename Fn>
  std::vector<T> list(Fn&& read_one) {
    const std::size_t n = size();
    std::vector<T> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) items.push_back(read_one());
    return items;
  }

  bool done() const { return pos_ == bytes_.size(); }
  const std::string& context() const { return context_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(context_ + ": truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace rmdl::detail
