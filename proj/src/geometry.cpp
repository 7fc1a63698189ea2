#include "softloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "softloc/error.hpp"
#include "softloc/random.hpp"

namespace softloc {

double distance(Point2D a, Point2D b) { return std::hypot(a.x - b.x, a.y - b.y); }

double RoomGrid::cell_diagonal() const { return std::hypot(cell_width(), cell_height()); }

void RoomGrid::validate() const {
  if (rows == 0 || cols == 0) {
    throw InvalidConfigError("room grid needs rows >= 1 and cols >= 1");
  }
  if (!std::isfinite(length) || !std::isfinite(width) || length < 0.0 || width < 0.0) {
    throw InvalidConfigError("room sides must be finite and non-negative (got " +
                             std::to_string(width) + " x " + std::to_string(length) + ")");
  }
}

void RoomGrid::check_index(AreaIndex k) const {
  if (k.value < 1 || k.value > area_count()) {
    throw InvalidIndexError("area index " + std::to_string(k.value) + " outside 1.." +
                            std::to_string(area_count()));
  }
}

AreaIndex RoomGrid::area_of(Point2D p) const {
  auto bin = [](double v, double extent, std::size_t count) -> std::size_t {
    if (extent <= 0.0) return 0;
    const double f = std::floor(v / extent * static_cast<double>(count));
    if (f < 0.0) return 0;
    return std::min(static_cast<std::size_t>(f), count - 1);
  };
  const std::size_t row = bin(p.y, length, rows);
  const std::size_t col = bin(p.x, width, cols);
  return AreaIndex::from_zero_based(row * cols + col);
}

Point2D area_center(const RoomGrid& grid, AreaIndex k) {
  grid.check_index(k);
  const std::size_t row = k.zero_based() / grid.cols;
  const std::size_t col = k.zero_based() % grid.cols;
  return {(static_cast<double>(col) + 0.5) * grid.cell_width(),
          (static_cast<double>(row) + 0.5) * grid.cell_height()};
}

double area_distance(const RoomGrid& grid, AreaIndex i, AreaIndex k) {
  if (i == k) {
    grid.check_index(i);
    return 0.0;
  }
  return distance(area_center(grid, i), area_center(grid, k));
}

double average_diagonal(std::span<const RoomGrid> grids) {
  if (grids.empty()) throw EmptyInputError("average_diagonal needs at least one room");
  double sum = 0.0;
  for (const auto& g : grids) sum += g.cell_diagonal();
  return sum / static_cast<double>(grids.size());
}

double quantization_upper_bound(const RoomGrid& grid, std::size_t samples,
                                std::uint64_t seed) {
  if (samples == 0) throw ValidationError("quantization_upper_bound needs samples >= 1");
  grid.validate();
  const double w = grid.cell_width();
  const double h = grid.cell_height();
  Rng rng(seed);
  double sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double dx = (rng.uniform() - 0.5) * w;
    const double dy = (rng.uniform() - 0.5) * h;
    sum += std::hypot(dx, dy);
  }
  return sum / static_cast<double>(samples);
}

}  // namespace softloc
