#include <algorithm>
#include <vector>

#include "rmdl/error.hpp"
#include "rmdl/rmdl.hpp"

namespace rmdl {

int majority_vote_binary(std::span<const int> votes) {
  if (votes.empty()) throw DomainError("majority vote: no votes");
  long long ones = 0;
  for (int v : votes) {
    if (v != 0 && v != 1) throw DomainError("binary majority vote: votes must be 0 or 1");
    ones += v;
  }
  // ⌊1/2 + (s − 1/2)/n⌋ = ⌊(n + 2s − 1) / 2n⌋ with a non-negative numerator.
  const auto n = static_cast<long long>(votes.size());
  return static_cast<int>((n + 2 * ones - 1) / (2 * n));
}

int majority_vote_multiclass(const Tensor& probabilities) {
  if (probabilities.rank() != 2) throw ShapeError("multiclass vote: expected an n×K matrix");
  const std::size_t n = probabilities.dim(0), k = probabilities.dim(1);
  if (n == 0 || k == 0) throw DomainError("multiclass vote: no votes");
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probabilities.raw() + i * k;
    ++counts[static_cast<std::size_t>(std::max_element(row, row + k) - row)];
  }
  const std::size_t top = *std::max_element(counts.begin(), counts.end());

  // Column sums taken over sorted values so that model order cannot change them.
  int best = -1;
  double best_mass = 0.0;
  std::vector<double> column(n);
  for (std::size_t label = 0; label < k; ++label) {
    if (counts[label] != top) continue;
    for (std::size_t i = 0; i < n; ++i) column[i] = probabilities[i * k + label];
    std::sort(column.begin(), column.end());
    double mass = 0.0;
    for (double p : column) mass += p;
    if (best < 0 || mass > best_mass) {
      best = static_cast<int>(label);
      best_mass = mass;
    }
  }
  return best;
}

}  // namespace rmdl
