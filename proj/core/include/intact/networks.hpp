#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "intact/integer_action.hpp"
#include "intact/mlp.hpp"

namespace intact {

using NamedParams = std::vector<std::pair<std::string, Var>>;

// Shared trunk with one linear head of width N_k per action dimension.
// Network widths depend on (state_dim, K) only; the bin counts appear
// nowhere but the final heads.
struct IntegerActor {
  Mlp trunk;
  std::vector<Linear> heads;
  IntegerActionSpec spec;

  IntegerActor() = default;
  IntegerActor(int state_dim, const std::vector<int>& hidden, IntegerActionSpec spec_,
               RngStream& rng);

  // K logit heads, each [B x N_k].
  std::vector<Var> forward(const Var& states) const;

  std::vector<Var> params() const;
  NamedParams named_params(const std::string& prefix) const;
};

struct ContinuousActor {
  Mlp trunk;
  Linear mean_head;
  Linear log_std_head;
  int action_dim = 0;

  ContinuousActor() = default;
  ContinuousActor(int state_dim, const std::vector<int>& hidden, int action_dim_, RngStream& rng);

  struct Heads {
    Var mean;
    Var log_std;
  };
  Heads forward(const Var& states) const;

  std::vector<Var> params() const;
  NamedParams named_params(const std::string& prefix) const;
};

// Q(s, a): the action input is the K-dimensional vector, identical for the
// continuous and integer agents.
struct QCritic {
  Mlp net;

  QCritic() = default;
  QCritic(int state_dim, int action_dim, const std::vector<int>& hidden, RngStream& rng);

  Var forward(const Var& states, const Var& actions) const;

  std::vector<Var> params() const;
  NamedParams named_params(const std::string& prefix) const;
};

NamedParams mlp_named_params(const Mlp& m, const std::string& prefix);

// Parameter checkpoint entries: name + shape header + row-major data. JSON
// serialization round-trips f64 bit-exactly.
nlohmann::json params_to_json(const NamedParams& params);
void params_from_json(const nlohmann::json& j, NamedParams& params);

}  // namespace intact
