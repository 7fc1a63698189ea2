#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "softloc/geometry.hpp"
#include "softloc/node_matrix.hpp"

namespace softloc {

/// Parametric stand-in for the reverberant-speech front end. Each node
/// observes its propagation delay (milliseconds) and a distance attenuation,
/// corrupted by Gaussian noise and a positive reverberation delay bias.
struct SimConfig {
  std::size_t node_count = 30;
  /// Feature layout cycles [delay_ms, attenuation, delay_ms, ...]; extra
  /// entries are independent noisy re-observations.
  std::size_t feature_dim = 2;
  double noise_std = 0.05;
  double reverb_blur = 0.5;  // ms, scales a U(0,1) delay bias
  double speed_of_sound = 343.0;

  void validate() const;
  /// Also checks node_count <= n - 1 for the grid's class count.
  void validate_for(std::size_t area_count) const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct NodeObservation {
  AreaIndex area;
  Point2D point;
  std::vector<double> feature;
};

struct Scene {
  RoomGrid grid;
  std::uint32_t room_id = 0;
  AreaIndex source_area;
  Point2D source_point;
  std::vector<NodeObservation> nodes;
};

enum class Split : std::uint32_t { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view to_string(Split split);

struct Dataset {
  Split split = Split::kTrain;
  std::uint64_t seed = 0;
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t node_count = 0;
  std::size_t feature_dim = 0;
  std::vector<RoomGrid> grids;
  std::vector<Scene> scenes;

  std::size_t area_count() const { return rows * cols; }
};

struct SizeRange {
  double lo = 4.0;
  double hi = 10.0;

  friend bool operator==(const SizeRange&, const SizeRange&) = default;
};

/// Seeded uniform room sizes. Throws ValidationError on an empty/invalid range.
std::vector<RoomGrid> sample_rooms(std::size_t count, SizeRange bounds, std::size_t rows,
                                   std::size_t cols, std::uint64_t seed);

/// One scene in `grid`: uniform source area and in-cell position, node areas
/// drawn without replacement from the other n - 1 areas.
Scene synthesize_scene(const RoomGrid& grid, const SimConfig& cfg, std::uint64_t seed);

/// Scene i uses derive_seed(seed, i) to pick its room and synthesize itself,
/// so generation order does not matter.
Dataset generate_dataset(std::span<const RoomGrid> grids, std::size_t scene_count,
                         const SimConfig& cfg, Split split, std::uint64_t seed);

/// Node rows of [one-hot(area) | feature]. With a shuffle seed the row order
/// is permuted.
NodeMatrix encode_model_input(const Scene& scene,
                              std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Throws ValidationError if a scene breaks the placement invariants.
void check_scene(const Scene& scene, std::size_t feature_dim);

}  // namespace softloc
