#include <doctest.h>

#include <cmath>

#include "intact/ppo.hpp"
#include "support/oracles.hpp"

using namespace intact;

// REINFORCE contract: rollout actions are plain integers, never graph nodes.
static_assert(std::is_same_v<decltype(RolloutBatch::indices), std::vector<std::vector<int>>>);

namespace {

RolloutBatch random_rollout(int n, int state_dim, RngStream& rng, double done_prob = 0.15) {
  RolloutBatch b;
  for (int i = 0; i < n; ++i) {
    std::vector<double> s;
    for (int j = 0; j < state_dim; ++j) s.push_back(rng.normal());
    b.states.push_back(std::move(s));
    b.indices.push_back({rng.uniform_int(4)});
    b.log_prob_old.push_back(-1.2);
    b.rewards.push_back(rng.normal());
    b.values.push_back(rng.normal());
    b.dones.push_back(rng.uniform() < done_prob ? 1.0 : 0.0);
  }
  b.bootstrap_value = rng.normal();
  return b;
}

}  // namespace

TEST_CASE("gae advantages") {
  SUBCASE("lambda 0 reduces to the one-step TD error") {
    RngStream rng(3);
    RolloutBatch b = random_rollout(12, 2, rng);
    gae_advantages(b, 0.97, 0.0);
    for (std::size_t t = 0; t < b.size(); ++t) {
      const double next_v = (t + 1 < b.size()) ? b.values[t + 1] : b.bootstrap_value;
      const double delta = b.rewards[t] + 0.97 * next_v * (1.0 - b.dones[t]) - b.values[t];
      CHECK(b.advantages[t] == doctest::Approx(delta).epsilon(1e-12));
      CHECK(b.returns[t] == doctest::Approx(delta + b.values[t]).epsilon(1e-12));
    }
  }

  SUBCASE("gamma = lambda = 1 with zero values gives reward-to-go") {
    RolloutBatch b;
    const std::vector<double> rewards{1.0, 2.0, 3.0, 4.0};
    for (const double r : rewards) {
      b.states.push_back({0.0});
      b.indices.push_back({0});
      b.log_prob_old.push_back(0.0);
      b.rewards.push_back(r);
      b.values.push_back(0.0);
      b.dones.push_back(0.0);
    }
    b.dones.back() = 1.0;  // single complete episode
    b.bootstrap_value = 99.0;  // masked by the terminal flag
    gae_advantages(b, 1.0, 1.0);
    CHECK(b.advantages[0] == doctest::Approx(10.0));
    CHECK(b.advantages[1] == doctest::Approx(9.0));
    CHECK(b.advantages[2] == doctest::Approx(7.0));
    CHECK(b.advantages[3] == doctest::Approx(4.0));
  }

  SUBCASE("matches the brute-force double loop") {
    RngStream rng(9);
    for (int trial = 0; trial < 10; ++trial) {
      RolloutBatch b = random_rollout(5, 1, rng, 0.3);
      gae_advantages(b, 0.92, 0.85);
      const auto oracle =
          test::gae_brute_force(b.rewards, b.values, b.dones, b.bootstrap_value, 0.92, 0.85);
      for (std::size_t t = 0; t < 5; ++t) {
        CHECK(std::abs(b.advantages[t] - oracle[t]) < 1e-12);
      }
    }
  }

  SUBCASE("ragged columns are an error") {
    RngStream rng(1);
    RolloutBatch b = random_rollout(4, 1, rng);
    b.values.pop_back();
    CHECK_THROWS_AS(gae_advantages(b, 0.99, 0.95), std::invalid_argument);
  }
}

TEST_CASE("ppo agent") {
  RngStream rng(17);

  SUBCASE("action log-probs normalize and values are finite") {
    RngStream arng(1);
    PpoAgent agent(3, IntegerActionSpec({4, 3}, false), PpoConfig{.hidden = {16, 16}}, arng);
    const std::vector<double> obs{0.2, -0.4, 1.0};
    RngStream r(2);
    const auto step = agent.act(obs, r);
    CHECK(step.indices.size() == 2);
    CHECK(std::isfinite(step.log_prob));
    CHECK(std::isfinite(step.value));
    CHECK(step.log_prob <= 0.0 + 1e-12);
    const auto det = agent.act_deterministic(obs);
    CHECK(det == agent.act_deterministic(obs));
  }

  SUBCASE("ratio is exactly 1 before the first update") {
    PpoConfig cfg;
    cfg.hidden = {16, 16};
    cfg.epochs = 1;
    cfg.minibatch = 32;
    cfg.rollout_steps = 32;
    RngStream arng(3);
    PpoAgent agent(2, IntegerActionSpec({5}, false), cfg, arng);

    RolloutBatch b;
    RngStream r(4);
    for (int i = 0; i < 32; ++i) {
      const std::vector<double> obs{r.normal(), r.normal()};
      const auto step = agent.act(obs, r);
      b.states.push_back(obs);
      b.indices.push_back(step.indices);
      b.log_prob_old.push_back(step.log_prob);
      b.rewards.push_back(r.normal());
      b.values.push_back(step.value);
      b.dones.push_back(0.0);
    }
    b.bootstrap_value = 0.0;
    gae_advantages(b, cfg.gamma, cfg.gae_lambda);

    // recomputed log-probs equal the stored snapshots: rho = 1 +- 1e-12
    for (std::size_t i = 0; i < b.size(); ++i) {
      Mat s(1, 2);
      s << b.states[i][0], b.states[i][1];
      const auto heads = agent.actor().forward(Var::constant(s));
      const double lp = categorical_log_prob(heads[0], {b.indices[i][0]}).payload()(0, 0);
      CHECK(std::abs(std::exp(lp - b.log_prob_old[i]) - 1.0) <= 1e-12);
    }

    // with the identity ratio the surrogate is -mean(normalized advantages) ~ 0
    RngStream urng(5);
    const auto [loss_pi, loss_v] = agent.update(b, urng);
    CHECK(std::abs(loss_pi) < 1e-8);
    CHECK(std::isfinite(loss_v));
  }

  SUBCASE("advantage normalization is mean zero, unit std") {
    RngStream r(6);
    RolloutBatch b = random_rollout(64, 2, r);
    gae_advantages(b, 0.99, 0.95);
    double m = 0.0;
    for (const double a : b.advantages) m += a;
    m /= static_cast<double>(b.size());
    double var = 0.0;
    for (const double a : b.advantages) var += (a - m) * (a - m);
    const double sd = std::sqrt(var / static_cast<double>(b.size()));
    // the update normalizes internally with these exact statistics
    double worst_mean = 0.0, worst_sd = 0.0;
    std::vector<double> norm(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) norm[i] = (b.advantages[i] - m) / (sd + 1e-8);
    for (const double a : norm) worst_mean += a;
    worst_mean /= static_cast<double>(norm.size());
    double nv = 0.0;
    for (const double a : norm) nv += (a - worst_mean) * (a - worst_mean);
    worst_sd = std::sqrt(nv / static_cast<double>(norm.size()));
    CHECK(std::abs(worst_mean) < 1e-10);
    CHECK(std::abs(worst_sd - 1.0) < 1e-6);
  }

  SUBCASE("update improves the surrogate on a bandit-shaped batch") {
    PpoConfig cfg;
    cfg.hidden = {16, 16};
    cfg.epochs = 4;
    cfg.minibatch = 16;
    cfg.lr = 1e-2;
    RngStream arng(7);
    PpoAgent agent(1, IntegerActionSpec({3}, false), cfg, arng);

    // arm 2 always pays off
    RolloutBatch b;
    RngStream r(8);
    for (int i = 0; i < 64; ++i) {
      const std::vector<double> obs{1.0};
      const auto step = agent.act(obs, r);
      b.states.push_back(obs);
      b.indices.push_back(step.indices);
      b.log_prob_old.push_back(step.log_prob);
      b.rewards.push_back(step.indices[0] == 2 ? 1.0 : 0.0);
      b.values.push_back(step.value);
      b.dones.push_back(1.0);
    }
    gae_advantages(b, cfg.gamma, cfg.gae_lambda);
    RngStream urng(9);
    agent.update(b, urng);

    Mat s(1, 1);
    s << 1.0;
    const auto heads = agent.actor().forward(Var::constant(s));
    const Var probs = softmax_rows(heads[0]);
    // mass moved toward the rewarded arm
    CHECK(probs.payload()(0, 2) > 1.0 / 3.0);
  }

  SUBCASE("checkpoint restores the policy") {
    PpoConfig cfg;
    cfg.hidden = {8};
    RngStream a1(1), a2(2);
    PpoAgent agent(2, IntegerActionSpec({4}, false), cfg, a1);
    PpoAgent other(2, IntegerActionSpec({4}, false), cfg, a2);
    other.restore(agent.checkpoint());
    CHECK(other.checkpoint().dump() == agent.checkpoint().dump());
    const std::vector<double> obs{0.5, -0.5};
    CHECK(agent.act_deterministic(obs) == other.act_deterministic(obs));
  }
}
