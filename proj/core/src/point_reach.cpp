#include "intact/point_reach.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace intact {

std::vector<double> PointReachEnv::reset(std::uint64_t seed) {
  RngStream rng(seed);
  for (auto& p : pos_) p = rng.uniform(-kWorkspace, kWorkspace);
  for (auto& t : target_) t = rng.uniform(-kWorkspace, kWorkspace);
  vel_ = {0.0, 0.0};
  t_ = 0;
  done_ = false;
  return observation();
}

EnvStep PointReachEnv::step(std::span<const double> action) {
  if (done_) throw std::logic_error("PointReachEnv::step: episode done; call reset()");
  if (action.size() != 2) {
    throw ShapeError("PointReachEnv::step: action size " + std::to_string(action.size()));
  }
  std::array<double, 2> a{std::clamp(action[0], -1.0, 1.0), std::clamp(action[1], -1.0, 1.0)};

  for (int i = 0; i < 2; ++i) {
    vel_[i] += kDt * (a[i] - kDamping * vel_[i]);
    pos_[i] += kDt * vel_[i];
  }
  ++t_;

  const double dx = pos_[0] - target_[0];
  const double dy = pos_[1] - target_[1];
  const double dist = std::sqrt(dx * dx + dy * dy);
  const double effort = a[0] * a[0] + a[1] * a[1];

  EnvStep out;
  out.reward = -dist - 0.1 * effort;
  out.done = t_ >= kHorizon;
  done_ = out.done;
  out.obs = observation();
  out.info["dist"] = dist;
  return out;
}

std::vector<double> PointReachEnv::observation() const {
  return {pos_[0], pos_[1], vel_[0], vel_[1], target_[0] - pos_[0], target_[1] - pos_[1]};
}

DiscretizedWrapper::DiscretizedWrapper(std::unique_ptr<ContinuousEnv> inner, int n_bins)
    : inner_(std::move(inner)) {
  spec_ = IntegerActionSpec(std::vector<int>(static_cast<std::size_t>(inner_->action_dim()), n_bins),
                            /*embed_all=*/true);
}

EnvStep DiscretizedWrapper::step(std::span<const int> action) {
  if (static_cast<int>(action.size()) != spec_.dims()) {
    throw ShapeError("DiscretizedWrapper::step: action length " + std::to_string(action.size()) +
                     ", expected " + std::to_string(spec_.dims()));
  }
  std::vector<double> cont(action.size());
  for (std::size_t k = 0; k < action.size(); ++k) {
    const int n = spec_.bins[k];
    if (action[k] < 0 || action[k] >= n) {
      throw std::out_of_range("DiscretizedWrapper::step: index " + std::to_string(action[k]) +
                              " outside {0.." + std::to_string(n - 1) + "}");
    }
    cont[k] = embed_index(action[k], n);
  }
  return inner_->step(cont);
}

}  // namespace intact
