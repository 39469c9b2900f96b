#pragma once

#include <span>
#include <vector>

#include "intact/autodiff.hpp"
#include "intact/rng.hpp"

namespace intact {

// i.i.d. Gumbel(0,1) entries: G = -ln(-ln U), U uniform clamped away from
// {0, 1} by 1e-12.
Mat sample_gumbel(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

// argmax(logits + G); distributed as Softmax(logits). Ties break to the
// lowest index.
int gumbel_max(std::span<const double> logits, RngStream& rng);

// Payload-level argmax with the same lowest-index tie rule.
int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Softmax((logits + gumbels) / tau), row-wise; differentiable w.r.t. logits.
Var gumbel_softmax(const Var& logits, const Mat& gumbels, double tau);

// Straight-Through Gumbel-Softmax over each row of [B x n] logits. One
// Gumbel draw serves both the hard argmax and the relaxation, so
// index == argmax(logits + G) and the gradient of `forward` w.r.t. the
// logits equals the gradient of `relaxed` exactly.
struct StgsSample {
  Var forward;             // one-hot payload, gradient of the relaxation
  std::vector<int> index;  // per row
  Var relaxed;             // Softmax((logits + G) / tau)
};

StgsSample stgs(const Var& logits, double tau, RngStream& rng);

// log Softmax(logits)[index] per row -> [B x 1].
Var categorical_log_prob(const Var& logits, const std::vector<int>& index);

// Analytic per-row entropy of Softmax(logits), differentiable -> [B x 1].
Var softmax_entropy_rows(const Var& logits);

// tanh-squashed Gaussian with the change-of-variables log-density
// correction. log_std is clamped to [-20, 2] internally. Shapes [B x k].
struct SquashedSample {
  Var action;    // in (-1, 1)^k
  Var log_prob;  // [B x 1]
};

SquashedSample squashed_gaussian(const Var& mean, const Var& log_std, RngStream& rng);

}  // namespace intact
