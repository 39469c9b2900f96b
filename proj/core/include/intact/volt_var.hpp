#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "intact/env.hpp"

namespace intact {

// Radial feeder description. Bus 0 is the substation; lines form a tree.
// All quantities are per-unit on a common base.
struct FeederSpec {
  struct Line {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
  };
  struct Capacitor {
    int bus = 0;
    double q = 0.0;  // injection when switched on
  };
  struct Regulator {
    int line = 0;          // boosts every bus downstream of this line
    double range = 0.1;    // tap 0 -> -range, tap 32 -> +range
  };
  struct Battery {
    int bus = 0;
    double p_max = 0.0;    // discharge at top tap, charge at bottom
    double capacity = 0.0; // energy in pu-hours
    double soc_init = 0.5;
  };
  struct Load {
    int bus = 0;
    double p = 0.0;
    double q = 0.0;
  };

  std::string name;
  int buses = 0;
  double v_source = 1.0;
  std::vector<Line> lines;
  std::vector<Capacitor> capacitors;
  std::vector<Regulator> regulators;
  Battery battery;
  std::vector<Load> base_load;
  std::vector<double> load_curve;  // 24 multipliers
  double noise_std = 0.0;

  static FeederSpec from_json(const nlohmann::json& j);
  static FeederSpec from_file(const std::filesystem::path& path);
  static FeederSpec default_feeder();  // the committed 13-bus table
  nlohmann::json to_json() const;
  void validate() const;
};

// Volt-Var control on a linearized radial feeder: v = v0 + R p + X q plus
// regulator boosts. Action = [caps..., regulator taps..., battery tap];
// caps are on/off, taps have 33 positions. Reward penalizes voltage
// excursions outside 1 +- 0.05, device switching, and a branch-flow loss
// proxy. Horizon is one day at hourly steps.
class VoltVarToyEnv : public IntegerEnv {
 public:
  static constexpr int kHorizon = 24;
  static constexpr double kVoltageBand = 0.05;
  static constexpr double kSwitchWeight = 0.1;
  static constexpr double kLossWeight = 0.01;

  VoltVarToyEnv();  // default committed feeder
  explicit VoltVarToyEnv(const FeederSpec& spec);
  explicit VoltVarToyEnv(const std::filesystem::path& feeder_file);

  int obs_dim() const override;
  const IntegerActionSpec& action_spec() const override { return action_spec_; }
  int horizon() const override { return kHorizon; }

  std::vector<double> reset(std::uint64_t seed) override;
  EnvStep step(std::span<const int> action) override;

  const FeederSpec& feeder() const { return spec_; }

  // Linear map from bus injections to voltages (no regulator boost);
  // exposes the superposition structure directly.
  Eigen::VectorXd voltage_profile(const Eigen::VectorXd& p_inj,
                                  const Eigen::VectorXd& q_inj) const;

 private:
  void build();
  Eigen::VectorXd current_voltages() const;
  std::vector<double> observation() const;
  void fill_injections(int time, Eigen::VectorXd& p, Eigen::VectorXd& q,
                       double battery_power) const;
  double loss_proxy(const Eigen::VectorXd& p_inj, const Eigen::VectorXd& q_inj) const;

  FeederSpec spec_;
  IntegerActionSpec action_spec_;
  Mat r_mat_;  // 2 * shared path resistance
  Mat x_mat_;
  std::vector<std::vector<int>> downstream_;  // per line: buses below it
  std::vector<int> parent_line_;              // per bus: line feeding it (-1 for root)

  // episode state
  std::vector<int> caps_;
  std::vector<int> taps_;
  int battery_tap_ = 16;
  double soc_ = 0.5;
  double battery_power_ = 0.0;  // applied power from the last action
  Mat load_noise_;              // [24 x buses] multiplicative noise
  int t_ = 0;
  bool done_ = true;
};

}  // namespace intact
