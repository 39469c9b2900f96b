#include "intact/env.hpp"

namespace intact {

double random_policy_return(ContinuousEnv& env, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("random_policy_return: episodes must be >= 1");
  RngStream rng(seed);
  double total = 0.0;
  std::vector<double> action(static_cast<std::size_t>(env.action_dim()));
  for (int e = 0; e < episodes; ++e) {
    env.reset(rng.child("episode").child(static_cast<std::uint64_t>(e)).seed());
    RngStream act_rng = rng.child("actions").child(static_cast<std::uint64_t>(e));
    bool done = false;
    while (!done) {
      for (auto& a : action) a = act_rng.uniform(-1.0, 1.0);
      const EnvStep s = env.step(action);
      total += s.reward;
      done = s.done;
    }
  }
  return total / static_cast<double>(episodes);
}

double random_policy_return(IntegerEnv& env, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("random_policy_return: episodes must be >= 1");
  RngStream rng(seed);
  const auto& spec = env.action_spec();
  double total = 0.0;
  std::vector<int> action(static_cast<std::size_t>(spec.dims()));
  for (int e = 0; e < episodes; ++e) {
    env.reset(rng.child("episode").child(static_cast<std::uint64_t>(e)).seed());
    RngStream act_rng = rng.child("actions").child(static_cast<std::uint64_t>(e));
    bool done = false;
    while (!done) {
      for (std::size_t k = 0; k < action.size(); ++k) action[k] = act_rng.uniform_int(spec.bins[k]);
      const EnvStep s = env.step(action);
      total += s.reward;
      done = s.done;
    }
  }
  return total / static_cast<double>(episodes);
}

}  // namespace intact
