#include "softloc/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "softloc/error.hpp"

namespace softloc {

using namespace detail;

namespace {

constexpr char kMagic[5] = "SLDS";

std::uint32_t narrow32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw ValidationError(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& ds) {
  put_magic(out, kMagic);
  put_u32(out, kDatasetVersion);
  put_u32(out, narrow32(ds.area_count(), "n"));
  put_u32(out, narrow32(ds.rows, "rows"));
  put_u32(out, narrow32(ds.cols, "cols"));
  put_u32(out, narrow32(ds.node_count, "node_count"));
  put_u32(out, narrow32(ds.feature_dim, "feature_dim"));
  put_u32(out, static_cast<std::uint32_t>(ds.split));
  put_u64(out, ds.seed);
  put_u32(out, narrow32(ds.grids.size(), "room count"));
  put_u64(out, ds.scenes.size());
  for (const auto& g : ds.grids) {
    put_f64(out, g.length);
    put_f64(out, g.width);
  }
  for (const auto& s : ds.scenes) {
    if (s.nodes.size() != ds.node_count) {
      throw ValidationError("scene has " + std::to_string(s.nodes.size()) + " nodes, dataset header says " +
                            std::to_string(ds.node_count));
    }
    put_u32(out, s.room_id);
    put_u32(out, narrow32(s.source_area.value, "source area"));
    put_f64(out, s.source_point.x);
    put_f64(out, s.source_point.y);
    for (const auto& node : s.nodes) {
      if (node.feature.size() != ds.feature_dim) {
        throw ValidationError("node feature dimension disagrees with dataset header");
      }
      put_u32(out, narrow32(node.area.value, "node area"));
      put_f64(out, node.point.x);
      put_f64(out, node.point.y);
      for (double f : node.feature) put_f64(out, f);
    }
  }
  if (!out) throw RuntimeFailure("write error while saving dataset");
}

Dataset read_dataset(std::istream& in) {
  expect_magic(in, kMagic, "dataset header");
  const auto version = get_u32(in, "dataset version");
  if (version != kDatasetVersion) {
    throw RuntimeFailure("unsupported dataset version " + std::to_string(version));
  }
  Dataset ds;
  const auto n = get_u32(in, "n");
  ds.rows = get_u32(in, "rows");
  ds.cols = get_u32(in, "cols");
  ds.node_count = get_u32(in, "node_count");
  ds.feature_dim = get_u32(in, "feature_dim");
  const auto split = get_u32(in, "split");
  if (split > 2) throw RuntimeFailure("bad split tag " + std::to_string(split));
  ds.split = static_cast<Split>(split);
  ds.seed = get_u64(in, "seed");
  const auto room_count = get_u32(in, "room count");
  const auto scene_count = get_u64(in, "scene count");
  if (n != ds.rows * ds.cols || n == 0) {
    throw RuntimeFailure("dataset header n = " + std::to_string(n) + " disagrees with grid " +
                         std::to_string(ds.rows) + "x" + std::to_string(ds.cols));
  }
  if (room_count == 0 && scene_count > 0) throw RuntimeFailure("dataset has scenes but no rooms");

  ds.grids.resize(room_count);
  for (auto& g : ds.grids) {
    g.length = get_f64(in, "room length");
    g.width = get_f64(in, "room width");
    g.rows = ds.rows;
    g.cols = ds.cols;
  }
  ds.scenes.reserve(static_cast<std::size_t>(scene_count));
  for (std::uint64_t i = 0; i < scene_count; ++i) {
    Scene s;
    s.room_id = get_u32(in, "room id");
    if (s.room_id >= room_count) {
      throw RuntimeFailure("scene " + std::to_string(i) + " references missing room " +
                           std::to_string(s.room_id));
    }
    s.grid = ds.grids[s.room_id];
    s.source_area = AreaIndex{get_u32(in, "source area")};
    s.grid.check_index(s.source_area);
    s.source_point.x = get_f64(in, "source x");
    s.source_point.y = get_f64(in, "source y");
    s.nodes.resize(ds.node_count);
    for (auto& node : s.nodes) {
      node.area = AreaIndex{get_u32(in, "node area")};
      s.grid.check_index(node.area);
      node.point.x = get_f64(in, "node x");
      node.point.y = get_f64(in, "node y");
      node.feature.resize(ds.feature_dim);
      for (auto& f : node.feature) f = get_f64(in, "node feature");
    }
    ds.scenes.push_back(std::move(s));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_dataset_summary(std::ostream& out, const Dataset& ds) {
  char buf[128];
  out << "split: " << to_string(ds.split) << '\n';
  out << "seed: " << ds.seed << '\n';
  out << "grid: " << ds.rows << "x" << ds.cols << " (" << ds.area_count() << " areas)\n";
  out << "nodes per scene: " << ds.node_count << '\n';
  out << "feature dim: " << ds.feature_dim << '\n';
  out << "scenes: " << ds.scenes.size() << '\n';
  std::vector<std::size_t> per_room(ds.grids.size(), 0);
  for (const auto& s : ds.scenes) ++per_room[s.room_id];
  out << "rooms: " << ds.grids.size() << '\n';
  for (std::size_t r = 0; r < ds.grids.size(); ++r) {
    std::snprintf(buf, sizeof buf, "  room %zu: %.4f m (x) by %.4f m (y), %zu scenes\n", r,
                  ds.grids[r].width, ds.grids[r].length, per_room[r]);
    out << buf;
  }
}

}  // namespace softloc
