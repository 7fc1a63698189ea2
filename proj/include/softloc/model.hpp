#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "softloc/node_matrix.hpp"

namespace softloc {

struct ModelShape {
  std::size_t classes = 0;      // n
  std::size_t feature_dim = 0;  // acoustic features per node
  std::size_t hidden = 64;      // h

  std::size_t input_dim() const { return classes + feature_dim; }
  std::size_t param_count() const;
  void validate() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Weights of the set classifier
///
///   per node   a1 = relu(W1 x + b1), a2 = relu(W2 a1 + b2)
///   pooled     p  = mean over nodes of a2
///   head       logits = W3 p + b3, y = softmax(logits)
///
/// stored in one flat vector in the order W1 b1 W2 b2 W3 b3 (row-major), so
/// any parameter can be addressed by a single index.
class ClassifierParams {
 public:
  ClassifierParams() = default;
  ClassifierParams(ModelShape shape, std::uint64_t seed);

  const ModelShape& shape() const { return shape_; }
  std::uint64_t seed() const { return seed_; }

  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  std::size_t size() const { return values_.size(); }

  const double* w1() const { return values_.data(); }
  const double* b1() const { return w1() + shape_.hidden * shape_.input_dim(); }
  const double* w2() const { return b1() + shape_.hidden; }
  const double* b2() const { return w2() + shape_.hidden * shape_.hidden; }
  const double* w3() const { return b2() + shape_.hidden; }
  const double* b3() const { return w3() + shape_.classes * shape_.hidden; }

  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;

 private:
  ModelShape shape_;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
};

/// Every entry drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) of its layer.
ClassifierParams init_params(ModelShape shape, std::uint64_t seed);

struct ForwardTrace {
  std::size_t nodes = 0;
  std::vector<double> pre1, act1;  // nodes x h
  std::vector<double> pre2, act2;  // nodes x h
  std::vector<double> pooled;      // h
  std::vector<double> logits;      // n
  std::vector<double> log_probs;   // n
  std::vector<double> probs;       // n, the softmax output
};

/// Throws ShapeMismatchError on a column-count mismatch or an empty node set,
/// ValidationError on non-finite input.
ForwardTrace forward(const ClassifierParams& params, const NodeMatrix& input);
void forward(const ClassifierParams& params, const NodeMatrix& input, ForwardTrace& trace);

/// -sum_k target[k] * log_probs[k]
double cross_entropy(std::span<const double> target, std::span<const double> log_probs);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as ClassifierParams::flat()
};

/// Soft-target cross-entropy and its exact gradient. target must sum to 1
/// within 1e-6.
LossAndGradient loss_and_gradient(const ClassifierParams& params, const NodeMatrix& input,
                                  std::span<const double> target);

/// Scratch space for repeated backward passes.
struct BackwardWorkspace {
  ForwardTrace trace;
  std::vector<double> d_logits, d_pooled, d_z2, d_a1;
};

/// Runs forward + backward and adds the gradient into `grad`. Returns the
/// loss; ws.trace holds the forward results afterwards.
double accumulate_gradient(const ClassifierParams& params, const NodeMatrix& input,
                           std::span<const double> target, std::span<double> grad,
                           BackwardWorkspace& ws);

/// Parameter block: u32 n, u32 feature_dim, u32 hidden, u64 seed,
/// u64 count, count x f64 (little-endian).
void write_params(std::ostream& out, const ClassifierParams& params);
ClassifierParams read_params(std::istream& in);

}  // namespace softloc
