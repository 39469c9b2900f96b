#pragma once

#include <vector>

#include "intact/distributions.hpp"

namespace intact {

// Layout of a multi-dimensional integer action: K variables, N_k >= 2 bins
// each. embed[k] selects whether the emitted component is T(a) in [-1, 1]
// (discretized-continuous spaces) or the raw integer (native-integer
// spaces). The emitted action vector always has length K, never sum(N_k).
struct IntegerActionSpec {
  std::vector<int> bins;
  std::vector<bool> embed;

  IntegerActionSpec() = default;
  IntegerActionSpec(std::vector<int> bins_, bool embed_all);
  IntegerActionSpec(std::vector<int> bins_, std::vector<bool> embed_);

  int dims() const { return static_cast<int>(bins.size()); }
  int logit_width() const;
  void validate() const;  // throws ConfigError

  // Copy with every embed flag on; the critic consumes [-1, 1]-normalized
  // actions regardless of what the environment takes.
  IntegerActionSpec all_embedded() const;
};

// T(a) = a * 2/(N-1) - 1, the order-preserving map of {0..N-1} onto [-1, 1].
double embed_index(int a, int n_bins);
Var embed(const Var& index_value, int n_bins);

// Differentiable random integer: <[0..n-1], D_STGS> per row. The payload is
// exactly the sampled argmax index; the gradient w.r.t. the logits is the
// relaxation's.
struct IntegerSample {
  Var value;               // [B x 1]
  std::vector<int> index;  // per row
};

IntegerSample integer_sample(const Var& logits, double tau, RngStream& rng);

// One STGS draw per action dimension, assembled into a length-K action with
// the per-dimension log-probabilities summed (independent categoricals).
struct AssembledAction {
  Var action;                            // [B x K]
  std::vector<std::vector<int>> indices; // [B][K]
  Var log_prob;                          // [B x 1]
};

AssembledAction assemble_action(const std::vector<Var>& heads, const IntegerActionSpec& spec,
                                double tau, RngStream& rng);

}  // namespace intact
