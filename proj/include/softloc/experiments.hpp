#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "softloc/evaluation.hpp"
#include "softloc/training.hpp"

namespace softloc {

struct Splits {
  const Dataset& train;
  const Dataset& valid;
  const Dataset& test;
};

enum class SweepParam { kAlphaS, kAlphaD };

std::string_view to_string(SweepParam p);
SweepParam parse_sweep_param(std::string_view name);

struct SweepRow {
  double value = 0.0;
  EvalReport report;
};

/// Trains one model per value (all with base.seed) and evaluates each on the
/// test split.
std::vector<SweepRow> sweep(SweepParam param, std::span<const double> values,
                            const TrainConfig& base, const Splits& data,
                            std::size_t ub_samples = kDefaultUbSamples);

void write_sweep_table(std::ostream& out, SweepParam param, std::span<const SweepRow> rows);
void write_sweep_json(std::ostream& out, SweepParam param, std::span<const SweepRow> rows);

struct StrategyResult {
  Strategy strategy;
  std::vector<EvalReport> runs;  // one per seed
  EvalReport median;             // per-room and aggregate medians over runs
};

struct CompareResult {
  std::vector<StrategyResult> strategies;  // in kAllStrategies order
};

/// Run seed s uses derive_seed(base.seed, s) (s = 0 keeps base.seed); every
/// strategy sees the same seeds.
CompareResult compare(const TrainConfig& base, const Splits& data, std::size_t seeds,
                      std::span<const Strategy> strategies = kAllStrategies,
                      std::size_t ub_samples = kDefaultUbSamples);

/// Median over runs of every per-room and aggregate metric. learning_error
/// is recomputed as median MAE - UB-MAE so the decomposition stays exact.
EvalReport median_report(std::span<const EvalReport> runs, std::string strategy);

/// Rooms x {MAE, ACC} plus average, one line per strategy.
void write_compare_table(std::ostream& out, const CompareResult& result);
/// Learning error per room for one-hot vs DSLC+SSLC (constant alpha_d), with
/// relative reduction in percent.
void write_learning_error_table(std::ostream& out, const CompareResult& result);
void write_compare_json(std::ostream& out, const CompareResult& result);

}  // namespace softloc
