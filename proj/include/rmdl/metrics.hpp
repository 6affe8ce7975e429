#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rmdl::metrics {

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct ConfusionCounts {
  std::vector<ClassCounts> per_class;
  std::size_t samples = 0;
};

// One-vs-rest counts for each of `classes` labels. Throws DomainError on a
// length mismatch or a label outside [0, classes).
ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

struct MicroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when any ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
};

// Pooled counts: P = ΣTP/(ΣTP+ΣFP), R = ΣTP/(ΣTP+ΣFN), F1 = Σ2TP/(Σ2TP+ΣFP+ΣFN).
MicroScores micro_scores(const ConfusionCounts& counts);

// Fraction of matching labels; 0 for empty input.
double accuracy(std::span<const int> truth, std::span<const int> predicted);

}  // namespace rmdl::metrics
