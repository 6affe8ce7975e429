#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rmdl/random.hpp"
#include "rmdl/tensor.hpp"

namespace rmdl::data {

enum class Modality { image, text };

/// Labeled examples of one modality. Images are held as an N×H×W×C tensor in
/// [0, 1]; text as tokenized documents. Labels lie in [0, classes).
struct Dataset {
  Modality modality = Modality::image;
  Tensor images;
  std::vector<std::vector<std::string>> documents;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  // Example count; `labels` may be empty for unlabelled inputs.
  std::size_t size() const {
    if (modality == Modality::text) return documents.size();
    return images.empty() ? 0 : images.dim(0);
  }
  std::size_t classes() const { return class_names.size(); }

  // Examples at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
  // Throws DomainError unless features and labels agree and every label < classes().
  void validate() const;
};

// Whole stream as bytes, inflated when it starts with the gzip magic 1f 8b.
std::string read_maybe_gzip(std::istream& in);

// IDX image (magic 0x803, dims count×rows×cols) and label (magic 0x801) files,
// plain or gzip-compressed. Classes are "0".."max label".
Dataset load_mnist_idx(std::istream& images, std::istream& labels);
Dataset load_mnist_files(const std::filesystem::path& images, const std::filesystem::path& labels);
// Images alone, without labels or class names.
Dataset load_idx_images(std::istream& images);
Dataset load_idx_image_file(const std::filesystem::path& images);

// One "label<TAB>text" record per line. Labels get indices in first-occurrence
// order; when `known_classes` is given, they are reused and an unseen label is
// a ParseError. Blank lines are skipped.
Dataset load_text_corpus(std::istream& in, const std::vector<std::string>* known_classes = nullptr);
Dataset load_text_file(const std::filesystem::path& path, const std::vector<std::string>* known_classes = nullptr);

// Seeded shuffle, then the first llround(fraction·N) items go to the first half.
// Both halves must be non-empty.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed);

/// Index batches over one epoch. The final batch may be short.
class BatchIterator {
 public:
  BatchIterator(std::size_t count, std::size_t batch_size, bool shuffle, std::uint64_t seed);

  // Fills `batch` and returns true, or returns false at the end of the epoch.
  bool next(std::vector<std::size_t>& batch);
  // Starts a new epoch, reshuffling when enabled.
  void reset();

  std::size_t batches_per_epoch() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  bool shuffle_;
  Rng rng_;
  std::size_t cursor_ = 0;
};

}  // namespace rmdl::data
