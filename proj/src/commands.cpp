#include "softloc/commands.hpp"

#include <fstream>
#include <ostream>
#include <string>

#include "softloc/dataset_io.hpp"
#include "softloc/error.hpp"

namespace softloc {

namespace fs = std::filesystem;

namespace {

struct RunData {
  Dataset train, valid, test;
};

template <typename Writer>
void write_text(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot open " + path.string() + " for writing");
  writer(out);
  if (!out) throw RuntimeFailure("write error on " + path.string());
}

RunData load_run(const fs::path& dir) {
  for (const char* name : {"train.slds", "valid.slds", "test.slds"}) {
    if (!fs::exists(dir / name)) {
      throw RuntimeFailure("missing dataset " + (dir / name).string() +
                           "; run 'softloc simulate' with the same config first");
    }
  }
  return {load_dataset(dir / "train.slds"), load_dataset(dir / "valid.slds"),
          load_dataset(dir / "test.slds")};
}

}  // namespace

fs::path run_directory(const ExperimentConfig& cfg) {
  return fs::path(cfg.output_dir) / ("run-" + config_hash(cfg));
}

SimulatedSplits simulate_splits(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto train_rooms = sample_rooms(cfg.train_rooms, cfg.room_sides, cfg.rows, cfg.cols,
                                        cfg.sub_seed("rooms/train"));
  const auto test_rooms = sample_rooms(cfg.test_rooms, cfg.room_sides, cfg.rows, cfg.cols,
                                       cfg.sub_seed("rooms/test"));
  return {
      generate_dataset(train_rooms, cfg.train_scenes, cfg.sim, Split::kTrain, cfg.sub_seed("data/train")),
      generate_dataset(train_rooms, cfg.valid_scenes, cfg.sim, Split::kValid, cfg.sub_seed("data/valid")),
      generate_dataset(test_rooms, cfg.test_scenes, cfg.sim, Split::kTest, cfg.sub_seed("data/test")),
  };
}

fs::path cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const SimulatedSplits data = simulate_splits(cfg);
  const Dataset* splits[] = {&data.train, &data.valid, &data.test};

  const fs::path dir = run_directory(cfg);
  fs::create_directories(dir);
  write_text(dir / "config.yaml", [&](std::ostream& out) { out << serialize_config(cfg); });
  for (const Dataset* split : splits) {
    const Dataset& ds = *split;
    const std::string name(to_string(ds.split));
    save_dataset(dir / (name + ".slds"), ds);
    write_text(dir / (name + ".summary.txt"), [&](std::ostream& out) { write_dataset_summary(out, ds); });
    log << "wrote " << (dir / (name + ".slds")).string() << " (" << ds.scenes.size() << " scenes)\n";
  }
  return dir;
}

fs::path cmd_train(const ExperimentConfig& cfg, bool resume, std::ostream& log) {
  cfg.validate();
  const fs::path dir = run_directory(cfg);
  const RunData data = load_run(dir);
  const TrainConfig tc = cfg.training();
  const fs::path ckpt_path = dir / "model.slck";

  TrainState state = resume && fs::exists(ckpt_path)
                         ? restore_state(tc, data.train, load_checkpoint(ckpt_path))
                         : init_state(tc, data.train);
  if (state.epoch > tc.epochs) {
    throw ValidationError("checkpoint is at epoch " + std::to_string(state.epoch) +
                          ", past the configured " + std::to_string(tc.epochs));
  }
  if (state.epoch > 0) log << "resuming " << to_string(tc.strategy) << " at epoch " << state.epoch << '\n';
  // One epoch at a time so an interrupted run can be resumed.
  const fs::path partial = dir / "model.slck.tmp";
  while (state.epoch < tc.epochs) {
    TrainConfig step = tc;
    step.epochs = state.epoch + 1;
    continue_fit(state, step, data.train, data.valid);
    save_checkpoint(partial, state);
    fs::rename(partial, ckpt_path);
  }
  write_text(dir / "history.tsv",
             [&](std::ostream& out) { write_history_table(out, tc.strategy, state.history); });
  if (!state.history.empty()) {
    const auto& last = state.history.back();
    log << to_string(tc.strategy) << ": epoch " << last.epoch << " loss " << last.train_loss
        << " train acc " << last.train_acc << " valid mae " << last.valid_mae << " valid acc "
        << last.valid_acc << '\n';
  }
  log << "wrote " << ckpt_path.string() << '\n';
  return ckpt_path;
}

EvalReport cmd_eval(const ExperimentConfig& cfg, std::optional<fs::path> checkpoint,
                    std::optional<fs::path> dataset, std::ostream& log) {
  cfg.validate();
  const fs::path dir = run_directory(cfg);
  const fs::path ckpt_path = checkpoint.value_or(dir / "model.slck");
  const fs::path data_path = dataset.value_or(dir / "test.slds");
  if (!fs::exists(ckpt_path)) throw RuntimeFailure("missing checkpoint " + ckpt_path.string());
  if (!fs::exists(data_path)) throw RuntimeFailure("missing dataset " + data_path.string());

  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const Dataset test = load_dataset(data_path);
  const EvalReport report =
      evaluate(ckpt.params, test, std::string(to_string(cfg.train.strategy)), cfg.ub_samples);

  fs::create_directories(dir);
  write_text(dir / "report.tsv", [&](std::ostream& out) { write_report_table(out, report); });
  write_text(dir / "report.json", [&](std::ostream& out) { write_report_json(out, report); });
  log << "MAE " << report.aggregate.mae << " m, ACC " << report.aggregate.acc << ", UB-MAE "
      << report.aggregate.ub_mae << " m\n";
  return report;
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& cfg, SweepParam param,
                                const std::vector<double>& values, std::ostream& log) {
  cfg.validate();
  const fs::path dir = run_directory(cfg);
  const RunData data = load_run(dir);
  const auto rows = sweep(param, values, cfg.training(), {data.train, data.valid, data.test},
                          cfg.ub_samples);
  const std::string stem = "sweep_" + std::string(to_string(param));
  write_text(dir / (stem + ".tsv"), [&](std::ostream& out) { write_sweep_table(out, param, rows); });
  write_text(dir / (stem + ".json"), [&](std::ostream& out) { write_sweep_json(out, param, rows); });
  write_sweep_table(log, param, rows);
  return rows;
}

CompareResult cmd_compare(const ExperimentConfig& cfg, std::size_t seeds, std::ostream& log) {
  cfg.validate();
  const fs::path dir = run_directory(cfg);
  const RunData data = load_run(dir);
  const auto result = compare(cfg.training(), {data.train, data.valid, data.test}, seeds,
                              kAllStrategies, cfg.ub_samples);
  write_text(dir / "compare.tsv", [&](std::ostream& out) { write_compare_table(out, result); });
  write_text(dir / "learning_error.tsv",
             [&](std::ostream& out) { write_learning_error_table(out, result); });
  write_text(dir / "compare.json", [&](std::ostream& out) { write_compare_json(out, result); });
  write_compare_table(log, result);
  return result;
}

}  // namespace softloc
