#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rmdl/tensor.hpp"

namespace rmdl::features {

// Lowercases ASCII letters and splits on runs of non-alphanumeric bytes.
std::vector<std::string> tokenize(std::string_view text);

// Counts every contiguous n-gram for n = 1..n_max; n-grams are joined by a single space.
std::map<std::string, std::size_t> ngram_counts(std::span<const std::string> terms, std::size_t n_max);

// Term ↔ index map. Index 0 is the reserved padding/unknown token (empty string),
// real terms start at 1 in first-occurrence order.
class Vocabulary {
 public:
  Vocabulary();

  // Returns the index of `term`, adding it if absent.
  std::size_t add(const std::string& term);
  // 0 when unknown.
  std::size_t index(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }

  // Number of slots including the reserved one.
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.size() <= 1; }

  std::size_t documents() const { return documents_; }
  std::size_t df(std::size_t index) const { return df_.at(index); }

  // Maps terms to indices, truncating at max_len and padding the tail with 0.
  std::vector<std::size_t> encode(std::span<const std::string> terms, std::size_t max_len) const;

  // Builds from per-document term lists: every distinct term in first-occurrence
  // order with its document frequency. When max_features > 0 only the terms with
  // the highest df are kept (ties to earlier terms), still in first-occurrence order.
  static Vocabulary fit(std::span<const std::vector<std::string>> documents, std::size_t max_features = 0);

  // Raw rebuild, used by deserialization.
  static Vocabulary from_parts(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t documents);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.documents_ == b.documents_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::unordered_map<std::string, std::size_t> lookup_;
  std::size_t documents_ = 0;
};

// Sorted-index sparse row of width `dim`.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  Tensor dense() const;
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

struct TfidfModel {
  Vocabulary vocab;
  std::size_t ngram_max = 1;

  // ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t index) const;
};

// Fits the vocabulary over the n-gram terms of each tokenized document.
TfidfModel tfidf_fit(std::span<const std::vector<std::string>> documents, std::size_t ngram_max = 1,
                     std::size_t max_features = 0);

// tf · idf per known n-gram, then L2-normalized; unknown n-grams are ignored.
// An all-unknown document yields the zero vector. Throws when the vocabulary is empty.
SparseVector tfidf_transform(std::span<const std::string> terms, const TfidfModel& model);

// Word vectors of a common dimension D.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  void insert(std::string term, std::vector<double> vector);
  bool contains(std::string_view term) const;
  // Zero vector for an unknown term.
  std::vector<double> lookup(std::string_view term) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Text format "term v1 ... vD" per line; D is taken from the first line.
// Throws ParseError (with the 1-based line) on a dimension change or a bad
// number, and on an empty stream.
EmbeddingTable glove_load(std::istream& in);

// max_len×D matrix: row i holds term i's vector, rows past the document are zero
// and terms past max_len are dropped.
Tensor embed_document(std::span<const std::string> terms, const EmbeddingTable& table, std::size_t max_len);

// Bytes to [0, 1] by x / 255, keeping `shape`.
Tensor normalize_image(std::span<const std::uint8_t> pixels, Shape shape);

}  // namespace rmdl::features
