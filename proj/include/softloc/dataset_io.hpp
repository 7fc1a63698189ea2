#pragma once

#include <filesystem>
#include <iosfwd>

#include "softloc/simulator.hpp"

namespace softloc {

/// Dataset file layout, all integers and floats little-endian:
///
///   header   "SLDS" u32 version=1, u32 n, u32 rows, u32 cols, u32 node_count,
///            u32 feature_dim, u32 split, u64 seed, u32 room_count,
///            u64 scene_count
///   rooms    room_count x (f64 length, f64 width)
///   scenes   scene_count x (u32 room_id, u32 source_area, f64 x, f64 y,
///            node_count x (u32 area, f64 x, f64 y, feature_dim x f64))
///
/// Area indices are stored 1-based.
inline constexpr std::uint32_t kDatasetVersion = 1;

void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Human-readable sidecar: counts, grid shape, rooms, per-room scene counts.
void write_dataset_summary(std::ostream& out, const Dataset& ds);

}  // namespace softloc
