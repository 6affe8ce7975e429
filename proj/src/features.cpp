#include "rmdl/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "rmdl/error.hpp"

namespace rmdl::features {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> terms;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      terms.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) terms.push_back(std::move(current));
  return terms;
}

namespace {

template <typename Fn>
void for_each_ngram(std::span<const std::string> terms, std::size_t n_max, Fn&& fn) {
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t start = 0; start + n <= terms.size(); ++start) {
      std::string gram = terms[start];
      for (std::size_t j = 1; j < n; ++j) {
        gram += ' ';
        gram += terms[start + j];
      }
      fn(std::move(gram));
    }
  }
}

}  // namespace

std::map<std::string, std::size_t> ngram_counts(std::span<const std::string> terms, std::size_t n_max) {
  if (n_max < 1) throw DomainError("ngram_counts: n_max must be >= 1");
  std::map<std::string, std::size_t> counts;
  for_each_ngram(terms, n_max, [&](std::string gram) { ++counts[std::move(gram)]; });
  return counts;
}

Vocabulary::Vocabulary() : terms_{""}, df_{0} {}

std::size_t Vocabulary::add(const std::string& term) {
  if (term.empty()) return 0;
  auto [it, inserted] = lookup_.try_emplace(term, terms_.size());
  if (inserted) {
    terms_.push_back(term);
    df_.push_back(0);
  }
  return it->second;
}

std::size_t Vocabulary::index(std::string_view term) const {
  const auto it = lookup_.find(std::string(term));
  return it == lookup_.end() ? 0 : it->second;
}

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> terms, std::size_t max_len) const {
  std::vector<std::size_t> out(max_len, 0);
  for (std::size_t i = 0; i < std::min(max_len, terms.size()); ++i) out[i] = index(terms[i]);
  return out;
}

Vocabulary Vocabulary::fit(std::span<const std::vector<std::string>> documents, std::size_t max_features) {
  Vocabulary all;
  all.documents_ = documents.size();
  for (const auto& doc : documents) {
    std::set<std::size_t> seen;
    for (const auto& term : doc) seen.insert(all.add(term));
    for (std::size_t idx : seen) ++all.df_[idx];
  }
  if (max_features == 0 || all.size() - 1 <= max_features) return all;

  std::vector<std::size_t> order(all.size() - 1);
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return all.df_[a] > all.df_[b]; });
  order.resize(max_features);
  std::sort(order.begin(), order.end());

  Vocabulary kept;
  kept.documents_ = all.documents_;
  for (std::size_t idx : order) kept.df_[kept.add(all.terms_[idx])] = all.df_[idx];
  return kept;
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t documents) {
  if (terms.empty() || !terms[0].empty() || terms.size() != df.size()) {
    throw FormatError("vocabulary: malformed term table");
  }
  Vocabulary v;
  v.documents_ = documents;
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (v.add(terms[i]) != i) throw FormatError("vocabulary: duplicate or empty term '" + terms[i] + "'");
    if (df[i] > documents) throw FormatError("vocabulary: df exceeds document count");
    v.df_[i] = df[i];
  }
  return v;
}

Tensor SparseVector::dense() const {
  Tensor t({dim});
  for (std::size_t i = 0; i < index.size(); ++i) t[index[i]] = value[i];
  return t;
}

double TfidfModel::idf(std::size_t index) const {
  const double n = static_cast<double>(vocab.documents());
  return std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df(index)))) + 1.0;
}

namespace {

std::vector<std::string> ngram_terms(std::span<const std::string> terms, std::size_t n_max) {
  std::vector<std::string> grams;
  for_each_ngram(terms, n_max, [&](std::string gram) { grams.push_back(std::move(gram)); });
  return grams;
}

}  // namespace

TfidfModel tfidf_fit(std::span<const std::vector<std::string>> documents, std::size_t ngram_max,
                     std::size_t max_features) {
  if (documents.empty()) throw DomainError("tfidf_fit: corpus is empty");
  if (ngram_max < 1) throw DomainError("tfidf_fit: ngram_max must be >= 1");
  std::vector<std::vector<std::string>> grams;
  grams.reserve(documents.size());
  for (const auto& doc : documents) grams.push_back(ngram_terms(doc, ngram_max));
  return TfidfModel{Vocabulary::fit(grams, max_features), ngram_max};
}

SparseVector tfidf_transform(std::span<const std::string> terms, const TfidfModel& model) {
  if (model.vocab.empty()) throw DomainError("tfidf_transform: vocabulary is empty");
  std::map<std::size_t, double> tf;
  for_each_ngram(terms, model.ngram_max, [&](std::string gram) {
    if (const std::size_t idx = model.vocab.index(gram); idx != 0) tf[idx] += 1.0;
  });
  SparseVector out;
  out.dim = model.vocab.size();
  double norm2 = 0.0;
  for (const auto& [idx, count] : tf) {
    const double w = count * model.idf(idx);
    out.index.push_back(static_cast<std::uint32_t>(idx));
    out.value.push_back(w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double norm = std::sqrt(norm2);
    for (double& w : out.value) w /= norm;
  }
  return out;
}

void EmbeddingTable::insert(std::string term, std::vector<double> vector) {
  if (vector.size() != dim_) {
    throw ShapeError("embedding '" + term + "' has " + std::to_string(vector.size()) + " values, expected " +
                     std::to_string(dim_));
  }
  vectors_[std::move(term)] = std::move(vector);
}

bool EmbeddingTable::contains(std::string_view term) const { return vectors_.count(std::string(term)) != 0; }

std::vector<double> EmbeddingTable::lookup(std::string_view term) const {
  const auto it = vectors_.find(std::string(term));
  return it == vectors_.end() ? std::vector<double>(dim_, 0.0) : it->second;
}

EmbeddingTable glove_load(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_dim = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto end = rest.find(' ');
      fields.push_back(rest.substr(0, end));
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    }
    if (fields.size() < 2) throw ParseError("expected a term followed by at least one value", line_no);
    std::vector<double> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      const auto* first = fields[i].data();
      const auto* last = first + fields[i].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw ParseError("bad number '" + std::string(fields[i]) + "'", line_no);
      }
      values.push_back(v);
    }
    if (!have_dim) {
      table = EmbeddingTable(values.size());
      have_dim = true;
    } else if (values.size() != table.dim()) {
      throw ParseError("expected " + std::to_string(table.dim()) + " values, found " + std::to_string(values.size()),
                       line_no);
    }
    table.insert(std::string(fields[0]), std::move(values));
  }
  if (!have_dim) throw ParseError("embedding file is empty", 0);
  return table;
}

Tensor embed_document(std::span<const std::string> terms, const EmbeddingTable& table, std::size_t max_len) {
  if (max_len < 1 || table.dim() < 1) throw DomainError("embed_document: max_len and dimension must be >= 1");
  const std::size_t d = table.dim();
  Tensor out({max_len, d});
  for (std::size_t i = 0; i < std::min(max_len, terms.size()); ++i) {
    const auto v = table.lookup(terms[i]);
    std::copy(v.begin(), v.end(), out.raw() + i * d);
  }
  return out;
}

Tensor normalize_image(std::span<const std::uint8_t> pixels, Shape shape) {
  Tensor t(std::move(shape));
  if (t.size() != pixels.size()) throw ShapeError("normalize_image: pixel count does not match shape");
  for (std::size_t i = 0; i < pixels.size(); ++i) t[i] = static_cast<double>(pixels[i]) / 255.0;
  return t;
}

}  // namespace rmdl::features
