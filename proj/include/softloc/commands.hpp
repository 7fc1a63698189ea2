#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "softloc/config.hpp"
#include "softloc/experiments.hpp"

namespace softloc {

struct SimulatedSplits {
  Dataset train, valid, test;
};

/// The datasets cmd_simulate writes, without touching the filesystem. Valid
/// scenes come from the training rooms, test scenes from separate rooms.
SimulatedSplits simulate_splits(const ExperimentConfig& cfg);

/// <output_dir>/run-<config_hash>
std::filesystem::path run_directory(const ExperimentConfig& cfg);

/// Writes {train,valid,test}.slds, a .summary.txt per split and config.yaml
/// into the run directory. The config is validated before anything is written.
std::filesystem::path cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);

/// Trains on the run's datasets; writes model.slck and history.tsv. With
/// `resume`, an existing model.slck is continued from its stored epoch.
std::filesystem::path cmd_train(const ExperimentConfig& cfg, bool resume, std::ostream& log);

/// Scores a checkpoint (default: the run's model.slck) on a dataset (default:
/// the run's test.slds); writes report.tsv and report.json.
EvalReport cmd_eval(const ExperimentConfig& cfg, std::optional<std::filesystem::path> checkpoint,
                    std::optional<std::filesystem::path> dataset, std::ostream& log);

/// Writes sweep_<param>.tsv and sweep_<param>.json.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, SweepParam param,
                                const std::vector<double>& values, std::ostream& log);

/// Writes compare.tsv, learning_error.tsv and compare.json.
CompareResult cmd_compare(const ExperimentConfig& cfg, std::size_t seeds, std::ostream& log);

}  // namespace softloc
