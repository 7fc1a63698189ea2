#include "softloc/simulator.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "softloc/error.hpp"
#include "softloc/random.hpp"

namespace softloc {

namespace {

Point2D uniform_in_cell(const RoomGrid& grid, AreaIndex k, Rng& rng) {
  const Point2D c = area_center(grid, k);
  return {c.x + (rng.uniform() - 0.5) * grid.cell_width(),
          c.y + (rng.uniform() - 0.5) * grid.cell_height()};
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (node_count == 0) throw InvalidConfigError("node_count must be >= 1");
  if (feature_dim == 0) throw InvalidConfigError("feature_dim must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw InvalidConfigError("noise_std must be finite and >= 0");
  }
  if (!(reverb_blur >= 0.0) || !std::isfinite(reverb_blur)) {
    throw InvalidConfigError("reverb_blur must be finite and >= 0");
  }
  if (!(speed_of_sound > 0.0) || !std::isfinite(speed_of_sound)) {
    throw InvalidConfigError("speed_of_sound must be positive");
  }
}

void SimConfig::validate_for(std::size_t area_count) const {
  validate();
  if (area_count < 1 || node_count > area_count - 1) {
    throw InvalidConfigError("node_count " + std::to_string(node_count) +
                             " exceeds the " + std::to_string(area_count - 1) +
                             " areas left after placing the source");
  }
}

std::vector<RoomGrid> sample_rooms(std::size_t count, SizeRange bounds, std::size_t rows,
                                   std::size_t cols, std::uint64_t seed) {
  if (count == 0) throw ValidationError("sample_rooms needs count >= 1");
  if (!(bounds.lo > 0.0) || !(bounds.hi >= bounds.lo) || !std::isfinite(bounds.hi)) {
    throw ValidationError("room size range [" + std::to_string(bounds.lo) + ", " +
                          std::to_string(bounds.hi) + "] is empty or not positive");
  }
  Rng rng(seed);
  std::vector<RoomGrid> rooms;
  rooms.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    RoomGrid g;
    g.length = rng.uniform(bounds.lo, bounds.hi);
    g.width = rng.uniform(bounds.lo, bounds.hi);
    g.rows = rows;
    g.cols = cols;
    g.validate();
    rooms.push_back(g);
  }
  return rooms;
}

Scene synthesize_scene(const RoomGrid& grid, const SimConfig& cfg, std::uint64_t seed) {
  grid.validate();
  const std::size_t n = grid.area_count();
  cfg.validate_for(n);
  Rng rng(seed);

  Scene scene;
  scene.grid = grid;
  scene.source_area = AreaIndex::from_zero_based(rng.below(n));
  scene.source_point = uniform_in_cell(grid, scene.source_area, rng);

  std::vector<std::size_t> free_areas;
  free_areas.reserve(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != scene.source_area.zero_based()) free_areas.push_back(k);
  }
  // Partial Fisher-Yates: the first node_count slots become the node areas.
  for (std::size_t j = 0; j < cfg.node_count; ++j) {
    const std::size_t pick = j + rng.below(free_areas.size() - j);
    std::swap(free_areas[j], free_areas[pick]);
  }

  const double ms_per_meter = 1000.0 / cfg.speed_of_sound;
  scene.nodes.reserve(cfg.node_count);
  for (std::size_t j = 0; j < cfg.node_count; ++j) {
    NodeObservation node;
    node.area = AreaIndex::from_zero_based(free_areas[j]);
    node.point = uniform_in_cell(grid, node.area, rng);
    const double d = distance(scene.source_point, node.point);
    node.feature.resize(cfg.feature_dim);
    for (std::size_t f = 0; f < cfg.feature_dim; ++f) {
      if (f % 2 == 0) {
        const double noise = cfg.noise_std * rng.normal();
        const double bias = cfg.reverb_blur * rng.uniform();
        node.feature[f] = d * ms_per_meter + noise + bias;
      } else {
        node.feature[f] = 1.0 / (1.0 + d) + cfg.noise_std * rng.normal();
      }
    }
    scene.nodes.push_back(std::move(node));
  }
  return scene;
}

Dataset generate_dataset(std::span<const RoomGrid> grids, std::size_t scene_count,
                         const SimConfig& cfg, Split split, std::uint64_t seed) {
  if (grids.empty()) throw EmptyInputError("generate_dataset needs at least one room");
  Dataset ds;
  ds.split = split;
  ds.seed = seed;
  ds.rows = grids.front().rows;
  ds.cols = grids.front().cols;
  ds.node_count = cfg.node_count;
  ds.feature_dim = cfg.feature_dim;
  for (const auto& g : grids) {
    if (g.rows != ds.rows || g.cols != ds.cols) {
      throw ValidationError("all rooms in a dataset must share one grid shape");
    }
  }
  cfg.validate_for(ds.area_count());
  ds.grids.assign(grids.begin(), grids.end());
  ds.scenes.reserve(scene_count);
  for (std::size_t i = 0; i < scene_count; ++i) {
    const std::uint64_t scene_seed = derive_seed(seed, i);
    Rng pick(derive_seed(scene_seed, "room"));
    const auto room = static_cast<std::uint32_t>(pick.below(grids.size()));
    Scene s = synthesize_scene(grids[room], cfg, derive_seed(scene_seed, "scene"));
    s.room_id = room;
    ds.scenes.push_back(std::move(s));
  }
  return ds;
}

NodeMatrix encode_model_input(const Scene& scene, std::optional<std::uint64_t> shuffle_seed) {
  const std::size_t n = scene.grid.area_count();
  const std::size_t fd = scene.nodes.empty() ? 0 : scene.nodes.front().feature.size();
  std::vector<std::size_t> order(scene.nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    rng.shuffle(order.begin(), order.end());
  }
  NodeMatrix m(scene.nodes.size(), n + fd);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& node = scene.nodes[order[r]];
    auto row = m.row(r);
    row[node.area.zero_based()] = 1.0;
    std::copy(node.feature.begin(), node.feature.end(), row.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return m;
}

void check_scene(const Scene& scene, std::size_t feature_dim) {
  const RoomGrid& g = scene.grid;
  g.check_index(scene.source_area);
  const Point2D c = area_center(g, scene.source_area);
  const double tol = 1e-9;
  if (std::abs(scene.source_point.x - c.x) > 0.5 * g.cell_width() + tol ||
      std::abs(scene.source_point.y - c.y) > 0.5 * g.cell_height() + tol) {
    throw ValidationError("source point lies outside its source area");
  }
  std::vector<bool> used(g.area_count(), false);
  used[scene.source_area.zero_based()] = true;
  for (const auto& node : scene.nodes) {
    g.check_index(node.area);
    if (used[node.area.zero_based()]) {
      throw ValidationError("node area " + std::to_string(node.area.value) +
                            " collides with the source or another node");
    }
    used[node.area.zero_based()] = true;
    if (node.feature.size() != feature_dim) {
      throw ValidationError("node feature has dimension " + std::to_string(node.feature.size()) +
                            ", expected " + std::to_string(feature_dim));
    }
  }
}

}  // namespace softloc
