#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "softloc/simulator.hpp"
#include "softloc/training.hpp"

namespace softloc {

inline constexpr int kConfigVersion = 1;

/// Everything one experiment needs. Serialized as YAML:
///
///   version: 1
///   seed: 2024
///   output_dir: runs
///   grid: {rows: 8, cols: 8}
///   rooms: {min_side: 4, max_side: 10, train_rooms: 10, test_rooms: 5}
///   simulator: {node_count: 30, feature_dim: 2, noise_std: 0.05,
///               reverb_blur: 0.5, speed_of_sound: 343}
///   splits: {train: 2000, valid: 500, test: 500}
///   training: {strategy: dslc_sslc_const, alpha_s: 2.8, alpha_d: 0.5,
///              epsilon_init: 0.1, epochs: 40, batch_size: 32, hidden: 64,
///              learning_rate: 0.001, beta1: 0.9, beta2: 0.999,
///              adam_epsilon: 1e-8}
///   evaluation: {ub_samples: 100000}
///
/// Every key is optional (defaults above); unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 2024;
  std::string output_dir = "runs";
  std::size_t rows = 8;
  std::size_t cols = 8;
  SizeRange room_sides{4.0, 10.0};
  std::size_t train_rooms = 10;
  std::size_t test_rooms = 5;
  SimConfig sim;
  std::size_t train_scenes = 2000;
  std::size_t valid_scenes = 500;
  std::size_t test_scenes = 500;
  TrainConfig train;  // train.seed is derived, not stored
  std::size_t ub_samples = 100000;

  void validate() const;

  /// Sub-seeds: derive_seed(seed, tag) for tags "rooms/train", "rooms/test",
  /// "data/train", "data/valid", "data/test" and "train".
  std::uint64_t sub_seed(std::string_view tag) const;
  /// Training config with its seed filled in from the master seed.
  TrainConfig training() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws InvalidConfigError with "<source>:<line>:<col>: ..." on syntax
/// errors, type errors, unknown keys and invalid values.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical YAML; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical serialization, with
/// output_dir left out so the same experiment hashes equally anywhere.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace softloc
