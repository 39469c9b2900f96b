#pragma once

#include <nlohmann/json.hpp>
#include <optional>

#include "intact/networks.hpp"
#include "intact/optim.hpp"

namespace intact {

// One replay record. `action` is the critic-facing form: the continuous
// action, or per-dimension T(index) for integer agents, so every stored
// component lies in [-1, 1].
struct Transition {
  std::vector<double> state;
  std::vector<int> indices;    // empty in continuous mode
  std::vector<double> action;  // length K, in [-1, 1]^K
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

// Fixed-capacity ring with FIFO eviction. Batches sample uniformly without
// replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return full_ ? ring_.size() : cursor_; }
  std::size_t capacity() const { return ring_.size(); }
  const Transition& operator[](std::size_t i) const { return ring_[i]; }

  std::vector<const Transition*> sample(std::size_t batch, RngStream& rng) const;

 private:
  std::vector<Transition> ring_;
  std::size_t cursor_ = 0;
  bool full_ = false;
};

struct SacConfig {
  double alpha = 0.05;
  double gamma = 0.99;
  double polyak = 0.005;
  double stgs_tau = 1.0;
  double lr = 3e-4;
  int batch = 256;
  std::size_t buffer_capacity = 100000;
  int warmup_steps = 1000;
  bool exact_entropy = false;  // analytic per-head entropy instead of sampled log-prob
  std::vector<int> hidden = {256, 256};
};

// Soft Actor-Critic over either action mode. The critics, targets, buffer
// layout and update rules are shared; only the actor head and the sampling
// path differ.
class SacAgent {
 public:
  SacAgent(int state_dim, IntegerActionSpec spec, SacConfig cfg, RngStream& rng);
  SacAgent(int state_dim, int action_dim, SacConfig cfg, RngStream& rng);

  bool integer_mode() const { return integer_actor_.has_value(); }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const SacConfig& config() const { return cfg_; }

  struct ActionSample {
    std::vector<int> indices;    // integer mode only
    std::vector<double> action;  // critic-facing, [-1, 1]^K
  };
  // Stochastic mode samples through the reparameterized path; deterministic
  // mode takes per-head argmax / tanh(mean).
  ActionSample act(std::span<const double> obs, bool stochastic, RngStream& rng) const;

  std::pair<double, double> critic_update(const std::vector<const Transition*>& batch,
                                          RngStream& rng);
  double actor_update(const std::vector<const Transition*>& batch, RngStream& rng);
  void polyak_update();

  // Mean analytic policy entropy over a batch of states (integer mode) or a
  // sampled estimate (continuous mode).
  double entropy_estimate(const std::vector<const Transition*>& batch, RngStream& rng) const;

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

  const QCritic& q1() const { return q1_; }
  const QCritic& q2() const { return q2_; }
  const QCritic& target_q1() const { return target_q1_; }
  const QCritic& target_q2() const { return target_q2_; }
  const std::optional<IntegerActor>& integer_actor() const { return integer_actor_; }
  const std::optional<ContinuousActor>& continuous_actor() const { return continuous_actor_; }

 private:
  struct PolicySample {
    Var action;    // [B x K], critic-facing
    Var log_prob;  // [B x 1]
    Var entropy;   // [B x 1], analytic; integer mode only
  };
  PolicySample sample_policy(const Var& states, RngStream& rng) const;
  NamedParams named_params() const;
  void init_critics(RngStream& rng);
  static Mat batch_states(const std::vector<const Transition*>& batch, bool next);

  int state_dim_ = 0;
  int action_dim_ = 0;
  SacConfig cfg_;
  std::optional<IntegerActor> integer_actor_;
  std::optional<ContinuousActor> continuous_actor_;
  IntegerActionSpec critic_spec_;  // all-embedded copy for the critic path
  QCritic q1_, q2_, target_q1_, target_q2_;
  std::optional<Adam> opt_actor_, opt_q1_, opt_q2_;
  long update_count_ = 0;
};

}  // namespace intact
