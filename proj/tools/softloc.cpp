// softloc: simulate / train / eval / sweep / compare.
// Exit codes: 0 success, 1 usage, 2 validation, 3 runtime.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "softloc/commands.hpp"
#include "softloc/error.hpp"
#include "softloc/kernels.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft label coding for grid-based sound source localization"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (YAML)")->required();
    sub->add_option("--seed-override", seed_override, "Replace the config's master seed");
    sub->add_option("--out", out_dir, "Replace the config's output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate train/valid/test datasets");
  add_common(simulate);

  bool resume = false;
  auto* train = app.add_subcommand("train", "Train one model with the configured strategy");
  add_common(train);
  train->add_flag("--resume", resume, "Continue from an existing checkpoint");

  std::optional<std::string> checkpoint, dataset;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint (default: run's model.slck)");
  eval->add_option("--dataset", dataset, "Dataset (default: run's test.slds)");

  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate one model per parameter value");
  add_common(sweep);
  sweep->add_option("--param", param, "alpha_s or alpha_d")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  std::size_t seeds = 1;
  auto* compare = app.add_subcommand("compare", "Train all six strategies and tabulate");
  add_common(compare);
  compare->add_option("--seeds", seeds, "Seeds per strategy (medians are reported)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    auto cfg = softloc::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_dir) cfg.output_dir = *out_dir;
    std::clog << "kernels: " << softloc::simd::to_string(softloc::simd::active_kernels().isa) << '\n';

    if (*simulate) {
      softloc::cmd_simulate(cfg, std::cout);
    } else if (*train) {
      softloc::cmd_train(cfg, resume, std::cout);
    } else if (*eval) {
      softloc::cmd_eval(cfg, checkpoint, dataset, std::cout);
    } else if (*sweep) {
      softloc::cmd_sweep(cfg, softloc::parse_sweep_param(param), values, std::cout);
    } else if (*compare) {
      softloc::cmd_compare(cfg, seeds, std::cout);
    }
  } catch (const softloc::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
