#pragma once
// Central finite-difference check of the classifier's analytic gradient.
// Shared by model_test and the acceptance binary.

#include <cmath>
#include <cstddef>
#include <vector>

#include "oracles.hpp"
#include "softloc/model.hpp"
#include "softloc/random.hpp"
#include "softloc/training.hpp"

namespace gradcheck {

struct Triple {
  softloc::ClassifierParams params;
  softloc::NodeMatrix input{1, 1};
  std::vector<double> static_row, dslc_row;  // dslc_row unused for the plain form
  double alpha = 0.0;
};

inline std::vector<double> random_distribution(softloc::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double total = 0;
  for (auto& x : v) total += x = rng.uniform() + 0.01;
  for (auto& x : v) x /= total;
  return v;
}

inline Triple random_triple(std::uint64_t seed, bool joint) {
  softloc::Rng rng(seed);
  const softloc::ModelShape shape{9, 2, 8};
  Triple t;
  t.params = softloc::init_params(shape, rng.next_u64());
  // Larger-than-init weights so the loss surface is not nearly flat.
  for (auto& w : t.params.flat()) w *= 2.0;
  const std::size_t nodes = 5;
  t.input = softloc::NodeMatrix(nodes, shape.input_dim());
  for (std::size_t r = 0; r < nodes; ++r) {
    auto row = t.input.row(r);
    row[rng.below(shape.classes)] = 1.0;
    for (std::size_t f = 0; f < shape.feature_dim; ++f) row[shape.classes + f] = rng.uniform(-1.5, 1.5);
  }
  t.static_row = random_distribution(rng, shape.classes);
  if (joint) {
    t.dslc_row = random_distribution(rng, shape.classes);
    t.alpha = rng.uniform(0.1, 0.9);
  }
  return t;
}

/// Loss as a function of the parameters, evaluated without the backward pass.
inline double loss_at(const Triple& t, const softloc::ClassifierParams& p) {
  const auto trace = softloc::forward(p, t.input);
  if (t.dslc_row.empty()) {
    double loss = 0;
    for (std::size_t k = 0; k < t.static_row.size(); ++k) loss -= t.static_row[k] * trace.log_probs[k];
    return loss;
  }
  return softloc::joint_loss(t.static_row, t.dslc_row, trace.log_probs, t.alpha);
}

inline bool same_relu_pattern(const softloc::ForwardTrace& a, const softloc::ForwardTrace& b) {
  for (std::size_t i = 0; i < a.pre1.size(); ++i) {
    if ((a.pre1[i] > 0) != (b.pre1[i] > 0)) return false;
  }
  for (std::size_t i = 0; i < a.pre2.size(); ++i) {
    if ((a.pre2[i] > 0) != (b.pre2[i] > 0)) return false;
  }
  return true;
}

struct Result {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // probes whose +-h step crossed a ReLU kink
  double worst = 0.0;
};

/// Probes `coords` random coordinates. The joint form is compared against
/// the analytic gradient of the mixed target alpha*dslc + (1-alpha)*static.
inline Result check(const Triple& t, std::size_t coords, std::uint64_t seed, double h = 1e-5) {
  std::vector<double> target = t.static_row;
  if (!t.dslc_row.empty()) {
    for (std::size_t k = 0; k < target.size(); ++k) {
      target[k] = t.alpha * t.dslc_row[k] + (1.0 - t.alpha) * t.static_row[k];
    }
  }
  const auto analytic = softloc::loss_and_gradient(t.params, t.input, target);
  const auto base = softloc::forward(t.params, t.input);

  softloc::Rng rng(seed);
  Result res;
  std::size_t attempts = 0;
  while (res.checked < coords && attempts++ < coords * 20) {
    const std::size_t i = rng.below(t.params.size());
    softloc::ClassifierParams plus = t.params, minus = t.params;
    plus.flat()[i] += h;
    minus.flat()[i] -= h;
    if (!same_relu_pattern(base, softloc::forward(plus, t.input)) ||
        !same_relu_pattern(base, softloc::forward(minus, t.input))) {
      ++res.skipped;
      continue;
    }
    const double numeric = (loss_at(t, plus) - loss_at(t, minus)) / (2.0 * h);
    res.worst = std::max(res.worst, oracle::relative_error(analytic.gradient[i], numeric));
    ++res.checked;
  }
  return res;
}

}  // namespace gradcheck
