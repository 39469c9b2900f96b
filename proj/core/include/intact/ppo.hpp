#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "intact/networks.hpp"
#include "intact/optim.hpp"

namespace intact {

// On-policy rollout storage. Actions are plain integers: the PPO path is
// score-function only, so no gradient ever flows through a sampled action.
struct RolloutBatch {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<int>> indices;
  std::vector<double> log_prob_old;  // frozen snapshots
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> dones;  // 1.0 at terminal transitions
  double bootstrap_value = 0.0;

  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return states.size(); }
  void clear();
};

// advantage_t = sum_l (gamma lambda)^l delta_{t+l} with
// delta_t = r_t + gamma V(s_{t+1}) (1 - done_t) - V(s_t); returns = adv + V.
void gae_advantages(RolloutBatch& batch, double gamma, double lam);

struct PpoConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double lr = 3e-4;
  double vf_coef = 0.5;
  int rollout_steps = 2048;
  int minibatch = 64;
  int epochs = 10;
  std::vector<int> hidden = {256, 256};
};

// Clipped-surrogate PPO with a categorical (integer) policy.
class PpoAgent {
 public:
  PpoAgent(int state_dim, IntegerActionSpec spec, PpoConfig cfg, RngStream& rng);

  const PpoConfig& config() const { return cfg_; }
  const IntegerActionSpec& spec() const { return actor_.spec; }

  struct Step {
    std::vector<int> indices;
    double log_prob = 0.0;
    double value = 0.0;
  };
  Step act(std::span<const double> obs, RngStream& rng) const;
  std::vector<int> act_deterministic(std::span<const double> obs) const;

  // Runs `epochs` passes of clipped-surrogate updates over shuffled
  // minibatches; advantages are normalized to mean 0 / std 1 first.
  // Returns mean (policy loss, value loss).
  std::pair<double, double> update(RolloutBatch& batch, RngStream& rng);

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

  const IntegerActor& actor() const { return actor_; }
  const Mlp& value_net() const { return value_net_; }

 private:
  NamedParams named_params() const;

  PpoConfig cfg_;
  IntegerActor actor_;
  Mlp value_net_;
  std::optional<Adam> opt_;
};

}  // namespace intact
