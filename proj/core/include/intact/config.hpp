#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace intact {

struct EnvConfig {
  std::string id;             // point_reach | volt_var
  int bins = 0;               // 0 = native action space; >= 2 discretizes point_reach
  std::string feeder_file;    // optional override for volt_var
};

// Full experiment description. Unknown keys are rejected at parse time;
// every default that influences a run is resolved here and echoed to the
// output directory.
struct TrainConfig {
  EnvConfig env;
  std::string agent;          // sac_continuous | sac_integer | ppo_integer | random
  std::string label;          // plot/compare key

  double alpha = -1.0;        // resolved per env when unset
  double gamma = 0.99;
  double polyak = 0.005;
  double stgs_tau = 1.0;
  double lr = 3e-4;
  std::vector<int> hidden = {256, 256};
  int batch = 256;
  long buffer = 100000;
  int warmup = 1000;
  bool exact_entropy = false;

  double clip_eps = 0.2;
  double gae_lambda = 0.95;
  int rollout = 2048;
  int minibatch = 64;
  int epochs = 10;

  long total_steps = 0;
  long eval_interval = 0;     // default: total_steps / 20, at least 1
  int eval_episodes = 10;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string out_dir;
};

// Throws ConfigError with a field-level message on any violation.
TrainConfig parse_train_config(const nlohmann::json& j);
TrainConfig load_config_file(const std::filesystem::path& path);

// Fully resolved echo; parse_train_config(to_json(c)) == c.
nlohmann::json to_json(const TrainConfig& c);

}  // namespace intact
