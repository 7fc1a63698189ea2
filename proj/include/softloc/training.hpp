#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "softloc/codebook.hpp"
#include "softloc/model.hpp"
#include "softloc/simulator.hpp"

namespace softloc {

/// The six label strategies. The DSLC variants train on
/// alpha * CE(dslc row) + (1 - alpha) * CE(static row), where the static row
/// is one-hot or SSLC and alpha is constant or the previous epoch's
/// training accuracy.
enum class Strategy {
  kOneHot,
  kSslc,
  kDslcOneHotConst,
  kDslcSslcConst,
  kDslcOneHotAdaptive,
  kDslcSslcAdaptive,
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::kOneHot,          Strategy::kSslc,
    Strategy::kDslcOneHotConst, Strategy::kDslcSslcConst,
    Strategy::kDslcOneHotAdaptive, Strategy::kDslcSslcAdaptive,
};

std::string_view to_string(Strategy s);
/// Accepts the names produced by to_string; throws InvalidConfigError.
Strategy parse_strategy(std::string_view name);

bool uses_dslc(Strategy s);
bool uses_sslc(Strategy s);
bool is_adaptive(Strategy s);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct TrainConfig {
  Strategy strategy = Strategy::kDslcSslcConst;
  double alpha_s = 2.8;
  double alpha_d = 0.5;
  double epsilon_init = 0.1;
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  std::size_t hidden = 64;
  AdamConfig adam;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, AdamConfig cfg);

  /// params -= lr * mhat / (sqrt(vhat) + eps), with bias-corrected moments.
  void step(std::span<double> params, std::span<const double> grad);

  std::uint64_t steps() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }
  void restore(std::uint64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<double> m_, v_;
};

/// alpha_d * CE(dslc_row) + (1 - alpha_d) * CE(static_row), both against
/// the same prediction given as log-probabilities.
double joint_loss(std::span<const double> static_row, std::span<const double> dslc_row,
                  std::span<const double> log_probs, double alpha_d);

/// DSLC weight for the coming epoch. Constant strategies return
/// cfg.alpha_d; adaptive ones return the previous epoch's training accuracy,
/// or 0 before any epoch has finished. Non-DSLC strategies return 0.
double alpha_schedule(const TrainConfig& cfg, std::optional<double> prev_epoch_accuracy);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double alpha_d = 0.0;
  double valid_mae = 0.0;
  double valid_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainState {
  ClassifierParams params;
  std::size_t epoch = 0;  // completed epochs
  double l_ave = 0.0;
  /// Static targets per training room (SSLC depends on the room's cell
  /// spacing); a single shared one-hot book for one-hot strategies.
  std::vector<CodeBook> static_books;
  /// S^(t): the DSLC produced by the last finished epoch (smoothed init at t = 0).
  CodeBook dslc;
  EpochStats stats;
  Adam optimizer;
  std::optional<double> prev_accuracy;
  std::vector<EpochRecord> history;

  const CodeBook& static_book(std::uint32_t room_id) const;
};

/// Fresh state for training on `train`.
TrainState init_state(const TrainConfig& cfg, const Dataset& train);

/// Replaces the softmax output fed to the DSLC statistics (not the one used
/// for the gradient). Lets tests inject a synthetic model.
using PredictionOverride = std::function<void(const Scene&, std::span<double> probs)>;

/// One pass over `data` in seeded shuffled order with mini-batch Adam
/// updates. Statistics are gathered from the same forward passes; at the end
/// the accuracy and the next DSLC codebook are derived and the stats reset.
/// Throws RuntimeFailure on a non-finite loss.
EpochRecord train_epoch(TrainState& state, const Dataset& data, const TrainConfig& cfg,
                        const PredictionOverride& override_predictions = {});

/// Runs epochs state.epoch + 1 .. cfg.epochs, scoring `valid` after each.
void continue_fit(TrainState& state, const TrainConfig& cfg, const Dataset& train,
                  const Dataset& valid);

TrainState fit(const TrainConfig& cfg, const Dataset& train, const Dataset& valid);

/// Checkpoint: "SLCK" u32 version, parameter block (see write_params),
/// u32 epoch, u64 adam steps, f64 m[P], f64 v[P], u32 has_prev_acc,
/// f64 prev_acc, u32 n, f64 dslc[n*n], u32 history rows,
/// rows x (u32 epoch, f64 loss, f64 train_acc, f64 alpha_d, f64 valid_mae,
/// f64 valid_acc). Little-endian throughout.
void write_checkpoint(std::ostream& out, const TrainState& state);
void save_checkpoint(const std::filesystem::path& path, const TrainState& state);

struct Checkpoint {
  ClassifierParams params;
  std::size_t epoch = 0;
  std::uint64_t adam_steps = 0;
  std::vector<double> adam_m, adam_v;
  std::optional<double> prev_accuracy;
  CodeBook dslc{1, CodeKind::kDslc};
  std::vector<EpochRecord> history;
};

Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds a resumable state from a checkpoint and the training data.
TrainState restore_state(const TrainConfig& cfg, const Dataset& train, Checkpoint ckpt);

/// Tab-separated: epoch strategy loss train_acc alpha_d valid_mae valid_acc.
void write_history_table(std::ostream& out, Strategy strategy,
                         std::span<const EpochRecord> history);

}  // namespace softloc
