#include "rmdl/metrics.hpp"

#include "rmdl/error.hpp"

namespace rmdl::metrics {

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) throw DomainError("confusion: label lists differ in length");
  ConfusionCounts c;
  c.per_class.resize(classes);
  c.samples = truth.size();
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes || static_cast<std::size_t>(p) >= classes) {
      throw DomainError("confusion: label outside [0, " + std::to_string(classes) + ")");
    }
    if (t == p) {
      ++c.per_class[t].tp;
    } else {
      ++c.per_class[p].fp;
      ++c.per_class[t].fn;
    }
  }
  for (auto& k : c.per_class) k.tn = c.samples - k.tp - k.fp - k.fn;
  return c;
}

MicroScores micro_scores(const ConfusionCounts& counts) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& k : counts.per_class) {
    tp += k.tp;
    fp += k.fp;
    fn += k.fn;
  }
  MicroScores s;
  auto ratio = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      s.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(tp, tp + fp);
  s.recall = ratio(tp, tp + fn);
  s.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return s;
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DomainError("accuracy: label lists differ in length");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace rmdl::metrics
