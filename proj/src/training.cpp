#include "softloc/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "softloc/error.hpp"
#include "softloc/evaluation.hpp"
#include "softloc/random.hpp"

namespace softloc {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kOneHot: return "one_hot";
    case Strategy::kSslc: return "sslc";
    case Strategy::kDslcOneHotConst: return "dslc_one_hot_const";
    case Strategy::kDslcSslcConst: return "dslc_sslc_const";
    case Strategy::kDslcOneHotAdaptive: return "dslc_one_hot_adaptive";
    case Strategy::kDslcSslcAdaptive: return "dslc_sslc_adaptive";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw InvalidConfigError("unknown strategy '" + std::string(name) +
                           "' (expected one_hot, sslc, dslc_one_hot_const, dslc_sslc_const, "
                           "dslc_one_hot_adaptive or dslc_sslc_adaptive)");
}

bool uses_dslc(Strategy s) { return s != Strategy::kOneHot && s != Strategy::kSslc; }

bool uses_sslc(Strategy s) {
  return s == Strategy::kSslc || s == Strategy::kDslcSslcConst || s == Strategy::kDslcSslcAdaptive;
}

bool is_adaptive(Strategy s) {
  return s == Strategy::kDslcOneHotAdaptive || s == Strategy::kDslcSslcAdaptive;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidConfigError("epochs must be >= 1");
  if (batch_size == 0) throw InvalidConfigError("batch_size must be >= 1");
  if (hidden == 0) throw InvalidConfigError("hidden must be >= 1");
  if (uses_dslc(strategy) && !is_adaptive(strategy) && !(alpha_d > 0.0 && alpha_d < 1.0)) {
    throw InvalidConfigError("alpha_d must lie in (0, 1) for constant-weight DSLC strategies");
  }
  if (!(epsilon_init > 0.0 && epsilon_init < 1.0)) {
    throw InvalidConfigError("epsilon_init must lie in (0, 1)");
  }
  if (!(alpha_s > 0.0) || !std::isfinite(alpha_s)) throw InvalidConfigError("alpha_s must be > 0");
  if (!(adam.learning_rate > 0.0)) throw InvalidConfigError("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InvalidConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw InvalidConfigError("Adam epsilon must be > 0");
}

Adam::Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++step_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
  }
}

void Adam::restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw ShapeMismatchError("optimizer state size does not match the model");
  }
  step_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

double joint_loss(std::span<const double> static_row, std::span<const double> dslc_row,
                  std::span<const double> log_probs, double alpha_d) {
  if (static_row.size() != dslc_row.size()) {
    throw ShapeMismatchError("static and DSLC rows differ in length");
  }
  return alpha_d * cross_entropy(dslc_row, log_probs) +
         (1.0 - alpha_d) * cross_entropy(static_row, log_probs);
}

double alpha_schedule(const TrainConfig& cfg, std::optional<double> prev_epoch_accuracy) {
  if (!uses_dslc(cfg.strategy)) return 0.0;
  if (!is_adaptive(cfg.strategy)) return cfg.alpha_d;
  return prev_epoch_accuracy.value_or(0.0);
}

const CodeBook& TrainState::static_book(std::uint32_t room_id) const {
  return static_books.size() == 1 ? static_books.front() : static_books.at(room_id);
}

namespace {

std::vector<CodeBook> build_static_books(const TrainConfig& cfg, const Dataset& train,
                                         double l_ave) {
  std::vector<CodeBook> books;
  if (!uses_sslc(cfg.strategy)) {
    books.push_back(one_hot_codebook(train.area_count()));
    return books;
  }
  const SslcConfig sslc{cfg.alpha_s, l_ave};
  books.reserve(train.grids.size());
  for (const auto& g : train.grids) books.push_back(sslc_codebook(g, sslc));
  return books;
}

void check_compatible(const TrainState& state, const Dataset& data) {
  const auto& s = state.params.shape();
  if (s.classes != data.area_count() || s.feature_dim != data.feature_dim) {
    throw ShapeMismatchError("training state has n = " + std::to_string(s.classes) +
                             ", feature_dim = " + std::to_string(s.feature_dim) +
                             "; dataset has n = " + std::to_string(data.area_count()) +
                             ", feature_dim = " + std::to_string(data.feature_dim));
  }
}

}  // namespace

TrainState init_state(const TrainConfig& cfg, const Dataset& train) {
  cfg.validate();
  if (train.scenes.empty()) throw EmptyInputError("training set has no scenes");
  const std::size_t n = train.area_count();
  ModelShape shape{n, train.feature_dim, cfg.hidden};

  TrainState state{
      .params = init_params(shape, derive_seed(cfg.seed, "init")),
      .epoch = 0,
      .l_ave = average_diagonal(train.grids),
      .static_books = {},
      .dslc = n >= 2 ? smoothed_codebook(n, cfg.epsilon_init) : one_hot_codebook(n),
      .stats = EpochStats(n),
      .optimizer = {},
      .prev_accuracy = std::nullopt,
      .history = {},
  };
  state.static_books = build_static_books(cfg, train, state.l_ave);
  state.optimizer = Adam(state.params.size(), cfg.adam);
  return state;
}

EpochRecord train_epoch(TrainState& state, const Dataset& data, const TrainConfig& cfg,
                        const PredictionOverride& override_predictions) {
  check_compatible(state, data);
  if (data.scenes.empty()) throw EmptyInputError("training set has no scenes");
  const std::size_t n = data.area_count();
  const std::size_t epoch = state.epoch + 1;
  const std::uint64_t epoch_seed = derive_seed(derive_seed(cfg.seed, "epoch"), epoch);

  std::vector<std::size_t> order(data.scenes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng(derive_seed(epoch_seed, "order")).shuffle(order.begin(), order.end());

  const double alpha = alpha_schedule(cfg, state.prev_accuracy);
  const bool dslc = uses_dslc(cfg.strategy);

  state.stats.reset();
  BackwardWorkspace ws;
  std::vector<double> grad(state.params.size(), 0.0);
  std::vector<double> target(n);
  std::vector<double> observed(n);
  double loss_sum = 0.0;

  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t b = start; b < stop; ++b) {
      const Scene& scene = data.scenes[order[b]];
      const AreaIndex cls = scene.source_area;
      const auto static_row = state.static_book(scene.room_id).row(cls);
      const auto dslc_row = state.dslc.row(cls);
      for (std::size_t k = 0; k < n; ++k) {
        target[k] = dslc ? alpha * dslc_row[k] + (1.0 - alpha) * static_row[k] : static_row[k];
      }

      const NodeMatrix input = encode_model_input(scene, derive_seed(epoch_seed, order[b]));
      accumulate_gradient(state.params, input, target, grad, ws);
      const double loss = dslc ? joint_loss(static_row, dslc_row, ws.trace.log_probs, alpha)
                               : cross_entropy(static_row, ws.trace.log_probs);
      if (!std::isfinite(loss)) {
        throw RuntimeFailure("non-finite loss at epoch " + std::to_string(epoch) +
                             "; lower the learning rate (currently " +
                             std::to_string(cfg.adam.learning_rate) + ")");
      }
      loss_sum += loss;

      if (override_predictions) {
        std::copy(ws.trace.probs.begin(), ws.trace.probs.end(), observed.begin());
        override_predictions(scene, observed);
        record_prediction(state.stats, cls, observed);
      } else {
        record_prediction(state.stats, cls, ws.trace.probs);
      }
    }
    const double inv = 1.0 / static_cast<double>(stop - start);
    for (double& g : grad) g *= inv;
    state.optimizer.step(state.params.flat(), grad);
  }

  EpochRecord rec;
  rec.epoch = epoch;
  rec.train_loss = loss_sum / static_cast<double>(data.scenes.size());
  rec.train_acc = state.stats.accuracy();
  rec.alpha_d = alpha;

  state.dslc = dslc_from_stats(state.stats, state.dslc);
  state.prev_accuracy = rec.train_acc;
  state.stats.reset();
  state.epoch = epoch;
  return rec;
}

void continue_fit(TrainState& state, const TrainConfig& cfg, const Dataset& train,
                  const Dataset& valid) {
  cfg.validate();
  check_compatible(state, valid);
  while (state.epoch < cfg.epochs) {
    EpochRecord rec = train_epoch(state, train, cfg);
    if (!valid.scenes.empty()) {
      const auto preds = predict_all(state.params, valid);
      rec.valid_mae = mae(preds, valid.scenes);
      rec.valid_acc = acc(preds, valid.scenes);
    }
    state.history.push_back(rec);
  }
}

TrainState fit(const TrainConfig& cfg, const Dataset& train, const Dataset& valid) {
  TrainState state = init_state(cfg, train);
  continue_fit(state, cfg, train, valid);
  return state;
}

namespace {

constexpr char kCheckpointMagic[5] = "SLCK";
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void write_checkpoint(std::ostream& out, const TrainState& state) {
  using namespace detail;
  put_magic(out, kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  write_params(out, state.params);
  put_u32(out, static_cast<std::uint32_t>(state.epoch));
  put_u64(out, state.optimizer.steps());
  for (double v : state.optimizer.first_moment()) put_f64(out, v);
  for (double v : state.optimizer.second_moment()) put_f64(out, v);
  put_u32(out, state.prev_accuracy ? 1u : 0u);
  put_f64(out, state.prev_accuracy.value_or(0.0));
  put_u32(out, static_cast<std::uint32_t>(state.dslc.size()));
  for (double v : state.dslc.entries()) put_f64(out, v);
  put_u32(out, static_cast<std::uint32_t>(state.history.size()));
  for (const auto& r : state.history) {
    put_u32(out, static_cast<std::uint32_t>(r.epoch));
    put_f64(out, r.train_loss);
    put_f64(out, r.train_acc);
    put_f64(out, r.alpha_d);
    put_f64(out, r.valid_mae);
    put_f64(out, r.valid_acc);
  }
  if (!out) throw RuntimeFailure("write error while saving checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  write_checkpoint(out, state);
}

Checkpoint read_checkpoint(std::istream& in) {
  using namespace detail;
  expect_magic(in, kCheckpointMagic, "checkpoint header");
  const auto version = get_u32(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw RuntimeFailure("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.params = read_params(in);
  const std::size_t p = c.params.size();
  c.epoch = get_u32(in, "epoch");
  c.adam_steps = get_u64(in, "adam steps");
  c.adam_m.resize(p);
  c.adam_v.resize(p);
  for (double& v : c.adam_m) v = get_f64(in, "adam m");
  for (double& v : c.adam_v) v = get_f64(in, "adam v");
  const bool has_prev = get_u32(in, "accuracy flag") != 0;
  const double prev = get_f64(in, "previous accuracy");
  if (has_prev) c.prev_accuracy = prev;
  const std::size_t n = get_u32(in, "dslc size");
  if (n != c.params.shape().classes) throw RuntimeFailure("checkpoint DSLC size disagrees with model");
  std::vector<double> dslc(n * n);
  for (double& v : dslc) v = get_f64(in, "dslc entries");
  c.dslc = CodeBook(n, CodeKind::kDslc, std::move(dslc));
  const auto rows = get_u32(in, "history rows");
  c.history.resize(rows);
  for (auto& r : c.history) {
    r.epoch = get_u32(in, "history epoch");
    r.train_loss = get_f64(in, "history loss");
    r.train_acc = get_f64(in, "history acc");
    r.alpha_d = get_f64(in, "history alpha");
    r.valid_mae = get_f64(in, "history valid mae");
    r.valid_acc = get_f64(in, "history valid acc");
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

TrainState restore_state(const TrainConfig& cfg, const Dataset& train, Checkpoint ckpt) {
  TrainState state = init_state(cfg, train);
  if (!(ckpt.params.shape() == state.params.shape())) {
    throw ShapeMismatchError("checkpoint model shape does not match the configured model");
  }
  state.params = std::move(ckpt.params);
  state.epoch = ckpt.epoch;
  state.optimizer.restore(ckpt.adam_steps, std::move(ckpt.adam_m), std::move(ckpt.adam_v));
  state.prev_accuracy = ckpt.prev_accuracy;
  state.dslc = std::move(ckpt.dslc);
  state.history = std::move(ckpt.history);
  return state;
}

void write_history_table(std::ostream& out, Strategy strategy,
                         std::span<const EpochRecord> history) {
  out << "epoch\tstrategy\tloss\ttrain_acc\talpha_d\tvalid_mae\tvalid_acc\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu\t%s\t%.6f\t%.4f\t%.4f\t%.4f\t%.4f\n", r.epoch,
                  std::string(to_string(strategy)).c_str(), r.train_loss, r.train_acc, r.alpha_d,
                  r.valid_mae, r.valid_acc);
    out << buf;
  }
}

}  // namespace softloc
