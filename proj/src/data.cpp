#include "rmdl/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <unordered_map>

#include "rmdl/error.hpp"
#include "rmdl/features.hpp"

namespace rmdl::data {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.modality = modality;
  out.class_names = class_names;
  if (!labels.empty()) {
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  }
  if (modality == Modality::text) {
    out.documents.reserve(indices.size());
    for (std::size_t i : indices) out.documents.push_back(documents.at(i));
  } else if (!indices.empty()) {
    Shape shape = images.shape();
    const std::size_t stride = images.size() / shape[0];
    shape[0] = indices.size();
    out.images = Tensor(shape);
    for (std::size_t r = 0; r < indices.size(); ++r) {
      std::copy_n(images.raw() + indices[r] * stride, stride, out.images.raw() + r * stride);
    }
  }
  return out;
}

void Dataset::validate() const {
  if (size() != labels.size()) throw DomainError("dataset: feature count differs from label count");
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes()) throw DomainError("dataset: label outside [0, K)");
  }
}

std::string read_maybe_gzip(std::istream& in) {
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f || static_cast<unsigned char>(raw[1]) != 0x8b) {
    return raw;
  }
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw FormatError("gzip: cannot initialise decoder");
  zs.next_in = reinterpret_cast<Bytef*>(raw.data());
  zs.avail_in = static_cast<uInt>(raw.size());
  std::string out;
  char buffer[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof buffer;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("gzip: corrupt or truncated stream");
    }
    out.append(buffer, sizeof buffer - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw FormatError("gzip: truncated stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset, const char* what) {
  if (offset + 4 > bytes.size()) throw FormatError(std::string(what) + ": truncated header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(bytes[offset + i]);
  return v;
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  return in;
}

}  // namespace

Dataset load_idx_images(std::istream& image_stream) {
  const std::string images = read_maybe_gzip(image_stream);
  if (read_be32(images, 0, "image file") != 0x803) throw FormatError("image file: bad magic number");
  const std::size_t count = read_be32(images, 4, "image file");
  const std::size_t rows = read_be32(images, 8, "image file");
  const std::size_t cols = read_be32(images, 12, "image file");
  if (count == 0 || rows == 0 || cols == 0) throw FormatError("image file: empty dimensions");
  const std::size_t pixels = count * rows * cols;
  if (images.size() < 16 + pixels) throw FormatError("image file: truncated pixel data");

  Dataset ds;
  ds.modality = Modality::image;
  ds.images = features::normalize_image(
      std::span(reinterpret_cast<const std::uint8_t*>(images.data()) + 16, pixels), {count, rows, cols, 1});
  return ds;
}

Dataset load_idx_image_file(const std::filesystem::path& images) {
  auto in = open_binary(images);
  return load_idx_images(in);
}

Dataset load_mnist_idx(std::istream& image_stream, std::istream& label_stream) {
  Dataset ds = load_idx_images(image_stream);
  const std::string labels = read_maybe_gzip(label_stream);
  if (read_be32(labels, 0, "label file") != 0x801) throw FormatError("label file: bad magic number");
  const std::size_t count = ds.size();
  const std::size_t label_count = read_be32(labels, 4, "label file");
  if (count != label_count) {
    throw FormatError("image count " + std::to_string(count) + " differs from label count " +
                      std::to_string(label_count));
  }
  if (labels.size() < 8 + count) throw FormatError("label file: truncated label data");

  int max_label = 0;
  ds.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int l = static_cast<unsigned char>(labels[8 + i]);
    ds.labels.push_back(l);
    max_label = std::max(max_label, l);
  }
  for (int k = 0; k <= max_label; ++k) ds.class_names.push_back(std::to_string(k));
  return ds;
}

Dataset load_mnist_files(const std::filesystem::path& images, const std::filesystem::path& labels) {
  auto img = open_binary(images);
  auto lbl = open_binary(labels);
  return load_mnist_idx(img, lbl);
}

Dataset load_text_corpus(std::istream& in, const std::vector<std::string>* known_classes) {
  Dataset ds;
  ds.modality = Modality::text;
  std::unordered_map<std::string, int> ids;
  if (known_classes) {
    ds.class_names = *known_classes;
    for (std::size_t i = 0; i < known_classes->size(); ++i) ids.emplace((*known_classes)[i], static_cast<int>(i));
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'label<TAB>text'", line_no);
    const std::string label = line.substr(0, tab);
    if (label.empty()) throw ParseError("empty label", line_no);
    auto it = ids.find(label);
    if (it == ids.end()) {
      if (known_classes) throw ParseError("label '" + label + "' is not one of the trained classes", line_no);
      it = ids.emplace(label, static_cast<int>(ds.class_names.size())).first;
      ds.class_names.push_back(label);
    }
    ds.labels.push_back(it->second);
    ds.documents.push_back(features::tokenize(std::string_view(line).substr(tab + 1)));
  }
  return ds;
}

Dataset load_text_file(const std::filesystem::path& path, const std::vector<std::string>* known_classes) {
  auto in = open_binary(path);
  return load_text_corpus(in, known_classes);
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("split: fraction must lie in (0, 1)");
  const std::size_t n = dataset.size();
  const auto first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (first == 0 || first >= n) throw DomainError("split: one half would be empty");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  return {dataset.subset(std::span(order).first(first)), dataset.subset(std::span(order).subspan(first))};
}

BatchIterator::BatchIterator(std::size_t count, std::size_t batch_size, bool shuffle, std::uint64_t seed)
    : order_(count), batch_size_(batch_size), shuffle_(shuffle), rng_(seed) {
  if (batch_size < 1) throw DomainError("batch size must be >= 1");
  std::iota(order_.begin(), order_.end(), 0);
  reset();
}

void BatchIterator::reset() {
  cursor_ = 0;
  if (shuffle_) rng_.shuffle(std::span<std::size_t>(order_));
}

bool BatchIterator::next(std::vector<std::size_t>& batch) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  batch.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_), order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return true;
}

}  // namespace rmdl::data
