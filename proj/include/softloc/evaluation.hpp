#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "softloc/geometry.hpp"
#include "softloc/model.hpp"
#include "softloc/simulator.hpp"

namespace softloc {

/// Monte-Carlo samples per room for UB-MAE in reports.
inline constexpr std::size_t kDefaultUbSamples = 100000;

/// Seed used for room `room_id`'s UB-MAE estimate.
std::uint64_t ub_seed_for_room(std::uint32_t room_id);

AreaIndex predict(const ClassifierParams& params, const Scene& scene);
std::vector<AreaIndex> predict_all(const ClassifierParams& params, const Dataset& data);

/// Mean distance from each true (continuous) source point to the center of
/// the predicted area.
double mae(std::span<const AreaIndex> predictions, std::span<const Scene> scenes);

/// Fraction of predictions equal to the true source area.
double acc(std::span<const AreaIndex> predictions, std::span<const Scene> scenes);

inline double learning_error(double mae_value, double ub_mae) { return mae_value - ub_mae; }

struct RoomMetrics {
  std::uint32_t room_id = 0;
  std::size_t count = 0;
  double mae = 0.0;
  double acc = 0.0;
  double ub_mae = 0.0;
  double learning_error = 0.0;
};

struct EvalReport {
  std::string strategy;
  std::vector<RoomMetrics> rooms;  // rooms with at least one scene, by id
  RoomMetrics aggregate;           // room_id unused
};

/// Scores given predictions. Aggregate MAE/ACC are over all scenes, the
/// aggregate UB-MAE is the scene-weighted mean of the per-room values.
EvalReport evaluate_predictions(std::span<const AreaIndex> predictions, const Dataset& test,
                                std::string strategy,
                                std::size_t ub_samples = kDefaultUbSamples);

EvalReport evaluate(const ClassifierParams& params, const Dataset& test, std::string strategy,
                    std::size_t ub_samples = kDefaultUbSamples);

/// Tab-separated, one row per room plus an "average" row.
void write_report_table(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);

}  // namespace softloc
