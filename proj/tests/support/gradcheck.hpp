#pragma once

// Central finite-difference oracle for layer and network gradients.
// Test-only: it drives forward() alone and never calls into backward code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rmdl/nn/layer.hpp"
#include "rmdl/nn/network.hpp"
#include "rmdl/random.hpp"

namespace rmdl::testing {

inline constexpr double kFiniteDifferenceStep = 1e-5;

// Relative error |a − n| / max(|a|, |n|, floor). The floor keeps entries whose
// true gradient is ~0 from dividing central-difference round-off (~1e-11) by
// itself; above the floor the measure is the plain relative error.
inline constexpr double kRelativeErrorFloor = 1e-3;

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelativeErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;

  void record(double analytic, double numeric, const std::string& where) {
    const double e = relative_error(analytic, numeric);
    ++checked;
    if (e > max_rel_error || worst.empty()) {
      if (e >= max_rel_error) {
        max_rel_error = e;
        worst = where + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
      }
    }
  }

  void merge(const GradCheckReport& other) {
    checked += other.checked;
    if (other.max_rel_error >= max_rel_error) {
      max_rel_error = other.max_rel_error;
      worst = other.worst;
    }
  }
};

// Central difference of `objective` with respect to one scalar slot.
inline double central_difference(double& slot, const std::function<double()>& objective) {
  const double saved = slot;
  slot = saved + kFiniteDifferenceStep;
  const double up = objective();
  slot = saved - kFiniteDifferenceStep;
  const double down = objective();
  slot = saved;
  return (up - down) / (2.0 * kFiniteDifferenceStep);
}

// Left-to-right Σ r_i·y_i.
inline double project(const Tensor& y, const Tensor& r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += r[i] * y[i];
  return acc;
}

// Checks a single layer under the scalar objective f(x, θ) = Σ r ⊙ layer(x),
// with r drawn uniformly in [-1, 1]. Parameters and (optionally) the input are
// perturbed one element at a time.
inline GradCheckReport check_layer(nn::Layer& layer, Tensor x, nn::Mode mode, Rng& rng, bool check_input = true) {
  const Tensor y0 = layer.forward(x, mode);
  Tensor r(y0.shape());
  for (auto& v : r.data()) v = rng.uniform(-1.0, 1.0);

  layer.zero_grad();
  layer.forward(x, mode);
  const Tensor dx = layer.backward(r);

  auto objective = [&] { return project(layer.forward(x, mode), r); };
  GradCheckReport report;
  for (auto& p : layer.params()) {
    const Tensor analytic = *p.grad;
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      report.record(analytic[i], central_difference((*p.value)[i], objective), p.name + "[" + std::to_string(i) + "]");
    }
  }
  if (check_input) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      report.record(dx[i], central_difference(x[i], objective), "x[" + std::to_string(i) + "]");
    }
  }
  return report;
}

// Checks every parameter of a network under the mean cross-entropy loss.
inline GradCheckReport check_network(nn::Network& net, const Tensor& x, const std::vector<int>& labels) {
  net.zero_grad();
  const Tensor logits = net.forward(x, nn::Mode::eval);
  net.backward(nn::loss_ce(logits, labels).grad);

  auto objective = [&] { return nn::loss_ce(net.forward(x, nn::Mode::eval), labels).loss; };
  GradCheckReport report;
  for (auto& p : net.params()) {
    const Tensor analytic = *p.grad;
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      report.record(analytic[i], central_difference((*p.value)[i], objective), p.name + "[" + std::to_string(i) + "]");
    }
  }
  return report;
}

inline Tensor uniform_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Values whose pairwise gaps all exceed the finite-difference step by a wide
// margin, so max-pool windows never change winner under perturbation.
inline Tensor well_separated_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<double> levels(t.size());
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(levels.size());
  rng.shuffle(std::span<double>(levels));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = levels[i];
  return t;
}

}  // namespace rmdl::testing
