#pragma once

#include <filesystem>

#include "intact/config.hpp"
#include "intact/env.hpp"

namespace intact::harness {

// Exit codes shared with the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericFailure = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
};

// Trains every seed in the config (in parallel worker threads), writing
//   <out_dir>/config_resolved.json
//   <out_dir>/seed_<S>/metrics.jsonl
//   <out_dir>/seed_<S>/checkpoint.json
RunOutcome run(const TrainConfig& cfg);

// Single-seed training; returns kExitOk or kExitNumericFailure.
int run_seed(const TrainConfig& cfg, std::uint64_t seed, const std::filesystem::path& seed_dir);

// ---- aggregation / plotting -------------------------------------------------

struct CurvePoint {
  long step = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population std across seeds
};

struct Curve {
  std::string label;
  std::vector<CurvePoint> points;
};

// Mean +- std of eval returns across the seeds of each run directory.
// Mismatched eval grids are resampled onto the coarsest grid; a note per
// resampled run is appended to `warnings` when given.
std::vector<Curve> aggregate_runs(const std::vector<std::filesystem::path>& run_dirs,
                                  std::vector<std::string>* warnings = nullptr);

void write_curves_csv(const std::filesystem::path& path, const std::vector<Curve>& curves);
std::vector<Curve> read_curves_csv(const std::filesystem::path& path);

// SVG geometry; the plot is an affine image of the CSV numbers.
inline constexpr double kSvgWidth = 800.0;
inline constexpr double kSvgHeight = 500.0;
inline constexpr double kSvgMarginLeft = 70.0;
inline constexpr double kSvgMarginRight = 20.0;
inline constexpr double kSvgMarginTop = 20.0;
inline constexpr double kSvgMarginBottom = 45.0;

struct SvgLayout {
  double step_min = 0.0, step_max = 1.0;
  double value_min = 0.0, value_max = 1.0;
  double x(double step) const;
  double y(double value) const;
  double step_from_x(double px) const;
  double value_from_y(double py) const;
};

SvgLayout compute_svg_layout(const std::vector<Curve>& curves);
void write_curves_svg(const std::filesystem::path& path, const std::vector<Curve>& curves);

// ---- comparison --------------------------------------------------------------

struct AgentSummary {
  std::string label;
  long total_steps = 0;
  std::vector<double> per_seed_final;  // final-window (last 10% of steps) mean per seed
  double final_mean = 0.0;
  double seed_std = 0.0;
};

// Throws ConfigError when step budgets differ across runs.
std::vector<AgentSummary> summarize_final_window(const std::vector<std::filesystem::path>& run_dirs);

// One row per ordered (a, b) pair: agent_a,agent_b,mean_a,std_a,mean_b,std_b,a_dominates_b.
std::string compare_table_csv(const std::vector<AgentSummary>& summaries);

// ---- checkpoint evaluation ----------------------------------------------------

// Deterministic-policy mean return over `episodes` fresh episodes.
double evaluate_checkpoint(const std::filesystem::path& checkpoint_file, int episodes);

// Env factories used by the runner and the eval CLI.
std::unique_ptr<ContinuousEnv> make_continuous_env(const EnvConfig& cfg);
std::unique_ptr<IntegerEnv> make_integer_env(const EnvConfig& cfg);

}  // namespace intact::harness
