#include "softloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "softloc/error.hpp"
#include "softloc/kernels.hpp"
#include "softloc/random.hpp"

namespace softloc {

std::size_t ModelShape::param_count() const {
  const std::size_t h = hidden;
  return h * input_dim() + h + h * h + h + classes * h + classes;
}

void ModelShape::validate() const {
  if (classes == 0 || feature_dim == 0 || hidden == 0) {
    throw ValidationError("model dimensions must be positive (n = " + std::to_string(classes) +
                          ", feature_dim = " + std::to_string(feature_dim) +
                          ", hidden = " + std::to_string(hidden) + ")");
  }
}

ClassifierParams::ClassifierParams(ModelShape shape, std::uint64_t seed)
    : shape_(shape), seed_(seed), values_(shape.param_count(), 0.0) {
  shape_.validate();
}

ClassifierParams init_params(ModelShape shape, std::uint64_t seed) {
  ClassifierParams params(shape, seed);
  Rng rng(seed);
  auto values = params.flat();
  const std::size_t h = shape.hidden;
  const std::size_t in = shape.input_dim();
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t j = 0; j < count; ++j) values[offset + j] = rng.uniform(-scale, scale);
  };
  std::size_t off = 0;
  fill(off, h * in + h, in);
  off += h * in + h;
  fill(off, h * h + h, h);
  off += h * h + h;
  fill(off, shape.classes * h + shape.classes, h);
  return params;
}

void forward(const ClassifierParams& params, const NodeMatrix& input, ForwardTrace& t) {
  const ModelShape& s = params.shape();
  if (input.cols() != s.input_dim()) {
    throw ShapeMismatchError("input has " + std::to_string(input.cols()) +
                             " columns, model expects n + feature_dim = " +
                             std::to_string(s.input_dim()));
  }
  if (input.rows() == 0) throw ShapeMismatchError("input has no nodes");
  for (double v : input.data()) {
    if (!std::isfinite(v)) throw ValidationError("non-finite value in model input");
  }

  const auto& k = simd::active_kernels();
  const std::size_t h = s.hidden;
  const std::size_t n = s.classes;
  const std::size_t nodes = input.rows();
  t.nodes = nodes;
  t.pre1.resize(nodes * h);
  t.act1.resize(nodes * h);
  t.pre2.resize(nodes * h);
  t.act2.resize(nodes * h);
  t.pooled.assign(h, 0.0);
  t.logits.resize(n);
  t.log_probs.resize(n);
  t.probs.resize(n);

  for (std::size_t j = 0; j < nodes; ++j) {
    double* z1 = t.pre1.data() + j * h;
    double* a1 = t.act1.data() + j * h;
    double* z2 = t.pre2.data() + j * h;
    double* a2 = t.act2.data() + j * h;
    simd::affine(k, params.w1(), params.b1(), input.row(j).data(), z1, h, s.input_dim());
    k.relu(z1, a1, h);
    simd::affine(k, params.w2(), params.b2(), a1, z2, h, h);
    k.relu(z2, a2, h);
    k.axpy(1.0, a2, t.pooled.data(), h);
  }
  const double inv_nodes = 1.0 / static_cast<double>(nodes);
  for (double& v : t.pooled) v *= inv_nodes;

  simd::affine(k, params.w3(), params.b3(), t.pooled.data(), t.logits.data(), n, h);

  // log-softmax with max subtraction
  const double m = *std::max_element(t.logits.begin(), t.logits.end());
  double z = 0.0;
  for (std::size_t c = 0; c < n; ++c) z += std::exp(t.logits[c] - m);
  const double lse = m + std::log(z);
  for (std::size_t c = 0; c < n; ++c) {
    t.log_probs[c] = t.logits[c] - lse;
    t.probs[c] = std::exp(t.log_probs[c]);
  }
}

ForwardTrace forward(const ClassifierParams& params, const NodeMatrix& input) {
  ForwardTrace t;
  forward(params, input, t);
  return t;
}

double cross_entropy(std::span<const double> target, std::span<const double> log_probs) {
  if (target.size() != log_probs.size()) {
    throw ShapeMismatchError("target has " + std::to_string(target.size()) +
                             " entries, prediction has " + std::to_string(log_probs.size()));
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < target.size(); ++c) {
    if (target[c] != 0.0) loss -= target[c] * log_probs[c];
  }
  return loss;
}

double accumulate_gradient(const ClassifierParams& params, const NodeMatrix& input,
                           std::span<const double> target, std::span<double> grad,
                           BackwardWorkspace& ws) {
  const ModelShape& s = params.shape();
  if (target.size() != s.classes) {
    throw ShapeMismatchError("target row has " + std::to_string(target.size()) +
                             " entries, model has " + std::to_string(s.classes) + " classes");
  }
  if (grad.size() != params.size()) throw ShapeMismatchError("gradient buffer has wrong size");
  double target_sum = 0.0;
  for (double v : target) target_sum += v;
  if (std::abs(target_sum - 1.0) > 1e-6) {
    throw ValidationError("target row sums to " + std::to_string(target_sum) + ", not 1");
  }

  forward(params, input, ws.trace);
  const ForwardTrace& t = ws.trace;
  const auto& k = simd::active_kernels();
  const std::size_t h = s.hidden;
  const std::size_t n = s.classes;
  const std::size_t in = s.input_dim();

  // Gradient block pointers, same layout as the parameters.
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + h * in;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + h * h;
  double* g_w3 = g_b2 + h;
  double* g_b3 = g_w3 + n * h;

  // d loss / d logits = y * sum(target) - target
  ws.d_logits.resize(n);
  for (std::size_t c = 0; c < n; ++c) ws.d_logits[c] = t.probs[c] * target_sum - target[c];

  simd::rank1_acc(k, ws.d_logits.data(), t.pooled.data(), g_w3, n, h);
  k.axpy(1.0, ws.d_logits.data(), g_b3, n);

  ws.d_pooled.assign(h, 0.0);
  simd::affine_transpose_acc(k, params.w3(), ws.d_logits.data(), ws.d_pooled.data(), n, h);

  const double inv_nodes = 1.0 / static_cast<double>(t.nodes);
  ws.d_z2.resize(h);
  ws.d_a1.resize(h);
  for (std::size_t j = 0; j < t.nodes; ++j) {
    const double* z1 = t.pre1.data() + j * h;
    const double* a1 = t.act1.data() + j * h;
    const double* z2 = t.pre2.data() + j * h;

    for (std::size_t r = 0; r < h; ++r) ws.d_z2[r] = ws.d_pooled[r] * inv_nodes;
    k.relu_mask(z2, ws.d_z2.data(), h);
    simd::rank1_acc(k, ws.d_z2.data(), a1, g_w2, h, h);
    k.axpy(1.0, ws.d_z2.data(), g_b2, h);

    std::fill(ws.d_a1.begin(), ws.d_a1.end(), 0.0);
    simd::affine_transpose_acc(k, params.w2(), ws.d_z2.data(), ws.d_a1.data(), h, h);
    k.relu_mask(z1, ws.d_a1.data(), h);
    simd::rank1_acc(k, ws.d_a1.data(), input.row(j).data(), g_w1, h, in);
    k.axpy(1.0, ws.d_a1.data(), g_b1, h);
  }

  return cross_entropy(target, t.log_probs);
}

LossAndGradient loss_and_gradient(const ClassifierParams& params, const NodeMatrix& input,
                                  std::span<const double> target) {
  LossAndGradient out;
  out.gradient.assign(params.size(), 0.0);
  BackwardWorkspace ws;
  out.loss = accumulate_gradient(params, input, target, out.gradient, ws);
  return out;
}

void write_params(std::ostream& out, const ClassifierParams& params) {
  using namespace detail;
  const ModelShape& s = params.shape();
  put_u32(out, static_cast<std::uint32_t>(s.classes));
  put_u32(out, static_cast<std::uint32_t>(s.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(s.hidden));
  put_u64(out, params.seed());
  put_u64(out, params.size());
  for (double v : params.flat()) put_f64(out, v);
}

ClassifierParams read_params(std::istream& in) {
  using namespace detail;
  ModelShape s;
  s.classes = get_u32(in, "model n");
  s.feature_dim = get_u32(in, "model feature_dim");
  s.hidden = get_u32(in, "model hidden");
  const auto seed = get_u64(in, "model seed");
  const auto count = get_u64(in, "parameter count");
  s.validate();
  if (count != s.param_count()) {
    throw RuntimeFailure("checkpoint stores " + std::to_string(count) +
                         " parameters, dimensions imply " + std::to_string(s.param_count()));
  }
  ClassifierParams params(s, seed);
  for (double& v : params.flat()) v = get_f64(in, "parameters");
  return params;
}

}  // namespace softloc
