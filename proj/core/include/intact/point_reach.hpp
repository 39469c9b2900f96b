#pragma once

#include <array>
#include <memory>

#include "intact/env.hpp"

namespace intact {

// 2-D point mass accelerating toward a per-episode target. Reward is
// -|pos - target| - 0.1 |a|^2 per step; the episode ends at the horizon.
class PointReachEnv : public ContinuousEnv {
 public:
  static constexpr int kHorizon = 150;
  static constexpr double kDt = 0.05;
  static constexpr double kDamping = 0.1;
  static constexpr double kWorkspace = 0.8;  // start/target bound

  int obs_dim() const override { return 6; }
  int action_dim() const override { return 2; }
  int horizon() const override { return kHorizon; }

  std::vector<double> reset(std::uint64_t seed) override;
  EnvStep step(std::span<const double> action) override;

  const std::array<double, 2>& target() const { return target_; }

 private:
  std::vector<double> observation() const;

  std::array<double, 2> pos_{};
  std::array<double, 2> vel_{};
  std::array<double, 2> target_{};
  int t_ = 0;
  bool done_ = true;
};

// Presents a continuous env as an integer-action one: index a maps to
// T(a) = a * 2/(N-1) - 1 per dimension.
class DiscretizedWrapper : public IntegerEnv {
 public:
  DiscretizedWrapper(std::unique_ptr<ContinuousEnv> inner, int n_bins);

  int obs_dim() const override { return inner_->obs_dim(); }
  const IntegerActionSpec& action_spec() const override { return spec_; }
  int horizon() const override { return inner_->horizon(); }

  std::vector<double> reset(std::uint64_t seed) override { return inner_->reset(seed); }
  EnvStep step(std::span<const int> action) override;

  ContinuousEnv& inner() { return *inner_; }

 private:
  std::unique_ptr<ContinuousEnv> inner_;
  IntegerActionSpec spec_;
};

}  // namespace intact
