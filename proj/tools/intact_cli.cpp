// Command-line front end: train / plot / compare / eval.
//
// Exit codes: 0 ok, 2 config error, 3 numeric failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "intact/harness.hpp"

namespace fs = std::filesystem;
using namespace intact;

int main(int argc, char** argv) {
  CLI::App app{"integer-action reinforcement learning trainer"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run a training config across its seeds");
  std::string config_path;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
  std::string out_override;
  train->add_option("--config", config_path, "JSON config file")->required();
  auto* seed_opt = train->add_option("--seed", seed_override, "train only this seed");
  train->add_option("--out", out_override, "override the config's output directory");

  // plot
  auto* plot = app.add_subcommand("plot", "aggregate runs into curves.csv + curves.svg");
  std::vector<std::string> plot_runs;
  std::string plot_out = ".";
  plot->add_option("--runs", plot_runs, "run directories")->required()->expected(-1);
  plot->add_option("--out", plot_out, "output directory");

  // compare
  auto* compare = app.add_subcommand("compare", "final-window comparison across agents");
  std::vector<std::string> cmp_runs;
  std::string cmp_out;
  compare->add_option("--runs", cmp_runs, "run directories (one per agent)")->required()->expected(-1);
  compare->add_option("--out", cmp_out, "also write the verdict table to this file");

  // eval
  auto* eval = app.add_subcommand("eval", "deterministic evaluation of a checkpoint");
  std::string ckpt_path;
  int episodes = 10;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint.json")->required();
  eval->add_option("--episodes", episodes, "episodes to run");

  CLI11_PARSE(app, argc, argv);
  has_seed_override = seed_opt->count() > 0;

  try {
    if (*train) {
      TrainConfig cfg = load_config_file(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (has_seed_override) cfg.seeds = {seed_override};
      const harness::RunOutcome out = harness::run(cfg);
      if (!out.message.empty()) std::cerr << out.message;
      return out.exit_code;
    }

    if (*plot) {
      std::vector<fs::path> dirs(plot_runs.begin(), plot_runs.end());
      std::vector<std::string> warnings;
      const auto curves = harness::aggregate_runs(dirs, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      fs::create_directories(plot_out);
      harness::write_curves_csv(fs::path(plot_out) / "curves.csv", curves);
      harness::write_curves_svg(fs::path(plot_out) / "curves.svg", curves);
      std::cout << "wrote " << (fs::path(plot_out) / "curves.csv").string() << " and "
                << (fs::path(plot_out) / "curves.svg").string() << '\n';
      return 0;
    }

    if (*compare) {
      std::vector<fs::path> dirs(cmp_runs.begin(), cmp_runs.end());
      const auto summaries = harness::summarize_final_window(dirs);
      const std::string table = harness::compare_table_csv(summaries);
      std::cout << table;
      if (!cmp_out.empty()) {
        std::ofstream out(cmp_out);
        out << table;
      }
      return 0;
    }

    if (*eval) {
      if (episodes < 1) throw ConfigError("eval: episodes must be >= 1");
      const double ret = harness::evaluate_checkpoint(ckpt_path, episodes);
      std::cout << "mean_return " << ret << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return harness::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return harness::kExitNumericFailure;
  }
  return 0;
}
