#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "intact/integer_action.hpp"
#include "intact/rng.hpp"

namespace intact {

struct EnvStep {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

class ContinuousEnv {
 public:
  virtual ~ContinuousEnv() = default;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  // Actions outside [-1, 1]^K are clipped.
  virtual EnvStep step(std::span<const double> action) = 0;
};

class IntegerEnv {
 public:
  virtual ~IntegerEnv() = default;
  virtual int obs_dim() const = 0;
  virtual const IntegerActionSpec& action_spec() const = 0;
  virtual int horizon() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  // Out-of-range integer components are an error, never clipped.
  virtual EnvStep step(std::span<const int> action) = 0;
};

// Mean undiscounted return of the uniform-random policy.
double random_policy_return(ContinuousEnv& env, int episodes, std::uint64_t seed);
double random_policy_return(IntegerEnv& env, int episodes, std::uint64_t seed);

}  // namespace intact
