#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace softloc {

/// A class label: 1-based index of a local area, row-major from the room's
/// origin corner (row 0 at y = 0, col 0 at x = 0).
struct AreaIndex {
  std::size_t value = 1;

  constexpr std::size_t zero_based() const { return value - 1; }
  static constexpr AreaIndex from_zero_based(std::size_t i) { return AreaIndex{i + 1}; }

  friend constexpr bool operator==(AreaIndex, AreaIndex) = default;
  friend constexpr auto operator<=>(AreaIndex, AreaIndex) = default;
};

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Point2D&, const Point2D&) = default;
};

double distance(Point2D a, Point2D b);

/// A rectangular room (x spans `width`, y spans `length`, both in meters)
/// partitioned into rows x cols equal local areas.
struct RoomGrid {
  double length = 0.0;
  double width = 0.0;
  std::size_t rows = 1;
  std::size_t cols = 1;

  std::size_t area_count() const { return rows * cols; }
  double cell_width() const { return width / static_cast<double>(cols); }
  double cell_height() const { return length / static_cast<double>(rows); }
  double cell_diagonal() const;

  /// Throws InvalidConfigError unless rows, cols >= 1 and sides are finite, >= 0.
  void validate() const;

  /// Throws InvalidIndexError if k is outside 1..area_count().
  void check_index(AreaIndex k) const;

  /// Area containing the point; points on the far walls belong to the last
  /// row/col. Points outside the room are clamped onto it.
  AreaIndex area_of(Point2D p) const;

  friend bool operator==(const RoomGrid&, const RoomGrid&) = default;
};

Point2D area_center(const RoomGrid& grid, AreaIndex k);

/// Center-to-center Euclidean distance between two local areas, in meters.
double area_distance(const RoomGrid& grid, AreaIndex i, AreaIndex k);

/// Mean cell diagonal over a set of rooms (l_ave). Throws EmptyInputError.
double average_diagonal(std::span<const RoomGrid> grids);

/// Monte-Carlo expected distance from a uniform in-cell point to its cell
/// center (UB-MAE). All cells of a uniform grid are congruent, so sampling
/// one cell's offsets is the average over all cells.
double quantization_upper_bound(const RoomGrid& grid, std::size_t samples,
                                std::uint64_t seed);

}  // namespace softloc
