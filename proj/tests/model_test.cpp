#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "softloc/error.hpp"
#include "softloc/kernels.hpp"
#include "softloc/model.hpp"
#include "softloc/random.hpp"

using namespace softloc;

namespace {

NodeMatrix random_input(Rng& rng, const ModelShape& shape, std::size_t nodes) {
  NodeMatrix m(nodes, shape.input_dim());
  for (std::size_t r = 0; r < nodes; ++r) {
    m.row(r)[rng.below(shape.classes)] = 1.0;
    for (std::size_t f = 0; f < shape.feature_dim; ++f) m.row(r)[shape.classes + f] = rng.uniform(-1, 1);
  }
  return m;
}

}  // namespace

TEST_CASE("kernel variant in use") {
  MESSAGE("kernels: " << simd::to_string(simd::active_kernels().isa));
}

TEST_CASE("parameter layout and init") {
  const ModelShape shape{9, 2, 8};
  CHECK(shape.input_dim() == 11);
  CHECK(shape.param_count() == 8 * 11 + 8 + 8 * 8 + 8 + 9 * 8 + 9);

  const ClassifierParams a = init_params(shape, 1);
  CHECK(a.size() == shape.param_count());
  CHECK(a == init_params(shape, 1));
  CHECK(a != init_params(shape, 2));

  const double* base = a.flat().data();
  CHECK(a.b1() - base == 88);
  CHECK(a.w2() - base == 96);
  CHECK(a.b2() - base == 160);
  CHECK(a.w3() - base == 168);
  CHECK(a.b3() - base == 240);

  const auto bounded = [](const double* p, std::size_t count, double scale) {
    for (std::size_t i = 0; i < count; ++i) {
      if (std::abs(p[i]) > scale) return false;
    }
    return true;
  };
  CHECK(bounded(a.w1(), 96, 1.0 / std::sqrt(11.0)));
  CHECK(bounded(a.w2(), 72, 1.0 / std::sqrt(8.0)));
  CHECK(bounded(a.w3(), 81, 1.0 / std::sqrt(8.0)));

  CHECK_THROWS_AS(init_params({0, 2, 8}, 1), ValidationError);
  CHECK_THROWS_AS(init_params({9, 0, 8}, 1), ValidationError);
  CHECK_THROWS_AS(init_params({9, 2, 0}, 1), ValidationError);
}

TEST_CASE("hand-computed forward pass") {
  // n = 2, one feature, one hidden unit, one node in area 1 with feature 0.25
  ClassifierParams p = init_params({2, 1, 1}, 0);
  const std::vector<double> values{0.5, -0.3, 2.0,  // W1
                                   0.1,             // b1
                                   1.5,             // W2
                                   -0.2,            // b2
                                   1.0, -1.0,       // W3
                                   0.0, 0.5};       // b3
  REQUIRE(p.size() == values.size());
  std::copy(values.begin(), values.end(), p.flat().begin());
  NodeMatrix x(1, 3);
  x.row(0)[0] = 1.0;
  x.row(0)[2] = 0.25;

  // pre1 = 0.5 + 2 * 0.25 + 0.1 = 1.1; pre2 = 1.5 * 1.1 - 0.2 = 1.45
  // logits = [1.45, -1.45 + 0.5]
  const auto t = forward(p, x);
  CHECK(t.pre1[0] == doctest::Approx(1.1));
  CHECK(t.pre2[0] == doctest::Approx(1.45));
  CHECK(t.pooled[0] == doctest::Approx(1.45));
  CHECK(t.logits[0] == doctest::Approx(1.45));
  CHECK(t.logits[1] == doctest::Approx(-0.95));
  const double p1 = 1.0 / (1.0 + std::exp(-2.4));
  CHECK(t.probs[0] == doctest::Approx(p1).epsilon(1e-14));
  CHECK(t.probs[1] == doctest::Approx(1.0 - p1).epsilon(1e-14));
  CHECK(t.log_probs[0] == doctest::Approx(std::log(p1)).epsilon(1e-14));

  // a negative pre-activation is cut by the ReLU
  x.row(0)[2] = -1.0;
  const auto cut = forward(p, x);
  CHECK(cut.pre1[0] == doctest::Approx(-1.4));
  CHECK(cut.act1[0] == 0.0);
  CHECK(cut.logits[0] == 0.0);
  CHECK(cut.logits[1] == doctest::Approx(0.5));
}

TEST_CASE("zero weights give a uniform softmax") {
  const ModelShape shape{64, 2, 16};
  ClassifierParams p = init_params(shape, 3);
  std::fill(p.flat().begin(), p.flat().end(), 0.0);
  Rng rng(1);
  const auto t = forward(p, random_input(rng, shape, 30));
  for (double y : t.probs) CHECK(y == doctest::Approx(1.0 / 64).epsilon(1e-15));

  std::vector<double> onehot(64, 0.0);
  onehot[5] = 1.0;
  const auto lg = loss_and_gradient(p, random_input(rng, shape, 30), onehot);
  CHECK(lg.loss == doctest::Approx(std::log(64.0)).epsilon(1e-14));
}

TEST_CASE("permutation invariance") {
  const ModelShape shape{16, 2, 12};
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ClassifierParams p = init_params(shape, rng.next_u64());
    const NodeMatrix x = random_input(rng, shape, 10);
    std::vector<std::size_t> order(10);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());
    NodeMatrix permuted(10, shape.input_dim());
    for (std::size_t r = 0; r < 10; ++r) {
      std::copy(x.row(order[r]).begin(), x.row(order[r]).end(), permuted.row(r).begin());
    }
    const auto a = forward(p, x), b = forward(p, permuted);
    for (std::size_t k = 0; k < shape.classes; ++k) CHECK(std::abs(a.probs[k] - b.probs[k]) < 1e-12);
  }
}

TEST_CASE("softmax output is a distribution") {
  const ModelShape shape{25, 3, 10};
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ClassifierParams p = init_params(shape, rng.next_u64());
    for (auto& w : p.flat()) w *= 4.0;
    const auto t = forward(p, random_input(rng, shape, 7));
    double total = 0;
    for (double y : t.probs) {
      CHECK(y > 0.0);
      total += y;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("huge logits stay finite in the log domain") {
  // Logit gaps beyond ~745 underflow exp() to 0, so only the log-probabilities
  // and the normalization are checked here.
  const ModelShape shape{25, 3, 10};
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ClassifierParams p = init_params(shape, rng.next_u64());
    for (auto& w : p.flat()) w *= 20.0;
    const auto t = forward(p, random_input(rng, shape, 7));
    double total = 0;
    for (double y : t.probs) total += y;
    CHECK(std::abs(total - 1.0) < 1e-9);
    for (double l : t.log_probs) {
      CHECK(std::isfinite(l));
      CHECK(l <= 0.0);
    }
  }
}

TEST_CASE("stationary point at target = prediction") {
  const ModelShape shape{9, 2, 8};
  Rng rng(6);
  const ClassifierParams p = init_params(shape, 11);
  const NodeMatrix x = random_input(rng, shape, 5);
  const auto t = forward(p, x);
  const auto lg = loss_and_gradient(p, x, t.probs);
  double entropy = 0;
  for (double y : t.probs) entropy -= y * std::log(y);
  CHECK(lg.loss == doctest::Approx(entropy).epsilon(1e-12));
  for (std::size_t k = 0; k < shape.classes; ++k) {
    CHECK(std::abs(lg.gradient[p.b3() - p.flat().data() + k]) < 1e-15);
  }
  for (std::size_t i = 0; i < shape.classes * shape.hidden; ++i) {
    CHECK(std::abs(lg.gradient[p.w3() - p.flat().data() + i]) < 1e-15);
  }

  // any other target costs more (Gibbs' inequality)
  for (int trial = 0; trial < 10; ++trial) {
    const auto other = gradcheck::random_distribution(rng, shape.classes);
    const double ce = oracle::cross_entropy(other, t.probs);
    double self_entropy = 0;
    for (double v : other) self_entropy -= v * std::log(v);
    CHECK(ce >= self_entropy);
    CHECK(loss_and_gradient(p, x, other).loss == doctest::Approx(ce).epsilon(1e-12));
  }
}

TEST_CASE("finite-difference gradient check") {
  for (bool joint : {false, true}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      CAPTURE(joint);
      CAPTURE(seed);
      const auto t = gradcheck::random_triple(seed + (joint ? 100 : 0), joint);
      const auto res = gradcheck::check(t, 50, seed);
      CHECK(res.checked == 50);
      CHECK(res.worst < 1e-4);
    }
  }
}

TEST_CASE("accumulate_gradient adds into the buffer") {
  const ModelShape shape{9, 2, 8};
  Rng rng(2);
  const ClassifierParams p = init_params(shape, 5);
  const NodeMatrix x1 = random_input(rng, shape, 4), x2 = random_input(rng, shape, 6);
  const auto t1 = gradcheck::random_distribution(rng, 9), t2 = gradcheck::random_distribution(rng, 9);
  const auto g1 = loss_and_gradient(p, x1, t1), g2 = loss_and_gradient(p, x2, t2);

  std::vector<double> acc(p.size(), 0.0);
  BackwardWorkspace ws;
  const double l1 = accumulate_gradient(p, x1, t1, acc, ws);
  const double l2 = accumulate_gradient(p, x2, t2, acc, ws);
  CHECK(l1 == g1.loss);
  CHECK(l2 == g2.loss);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(acc[i] == doctest::Approx(g1.gradient[i] + g2.gradient[i]).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  const ModelShape shape{9, 2, 8};
  const ClassifierParams p = init_params(shape, 5);
  CHECK_THROWS_AS(forward(p, NodeMatrix(3, 10)), ShapeMismatchError);
  CHECK_THROWS_AS(forward(p, NodeMatrix(0, 11)), ShapeMismatchError);
  NodeMatrix bad(2, 11);
  bad.row(1)[10] = std::nan("");
  CHECK_THROWS_AS(forward(p, bad), ValidationError);

  const NodeMatrix ok(2, 11);
  CHECK_THROWS_AS(loss_and_gradient(p, ok, std::vector<double>(9, 0.2)), ValidationError);
  CHECK_THROWS_AS(loss_and_gradient(p, ok, std::vector<double>(8, 0.125)), ShapeMismatchError);
}

TEST_CASE("parameter serialization") {
  const ClassifierParams p = init_params({9, 2, 8}, 42);
  std::stringstream buf;
  write_params(buf, p);
  const ClassifierParams q = read_params(buf);
  CHECK(q == p);
  CHECK(q.seed() == 42);
  CHECK(q.shape() == p.shape());

  std::string bytes;
  {
    std::ostringstream out;
    write_params(out, p);
    bytes = out.str();
  }
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_params(truncated), RuntimeFailure);
}
