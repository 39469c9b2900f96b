#include "intact/distributions.hpp"

#include <cmath>

namespace intact {

namespace {
constexpr double kUniformEps = 1e-12;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
}  // namespace

Mat sample_gumbel(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Mat g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double u = rng.uniform();
      u = std::min(std::max(u, kUniformEps), 1.0 - kUniformEps);
      g(i, j) = -std::log(-std::log(u));
    }
  }
  return g;
}

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int j = 1; j < row.size(); ++j) {
    if (row(j) > row(best)) best = j;
  }
  return best;
}

int gumbel_max(std::span<const double> logits, RngStream& rng) {
  if (logits.size() < 2) throw ShapeError("gumbel_max: need n >= 2 logits");
  for (const double v : logits) {
    if (!std::isfinite(v)) throw DomainError("gumbel_max: non-finite logit");
  }
  const Mat g = sample_gumbel(1, static_cast<Eigen::Index>(logits.size()), rng);
  Eigen::RowVectorXd z(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) z(static_cast<Eigen::Index>(j)) = logits[j] + g(0, static_cast<Eigen::Index>(j));
  return argmax_row(z);
}

Var gumbel_softmax(const Var& logits, const Mat& gumbels, double tau) {
  if (tau <= 0.0) throw ConfigError("gumbel_softmax: tau must be positive");
  if (gumbels.rows() != logits.rows() || gumbels.cols() != logits.cols()) {
    throw ShapeError("gumbel_softmax: logits " + shape_str(logits.payload()) + " vs gumbels " +
                     shape_str(gumbels));
  }
  return softmax_rows(scale(add(logits, Var::constant(gumbels)), 1.0 / tau));
}

StgsSample stgs(const Var& logits, double tau, RngStream& rng) {
  if (logits.cols() < 2) {
    throw ShapeError("stgs: need n >= 2 logits, got " + shape_str(logits.payload()));
  }
  const Mat g = sample_gumbel(logits.rows(), logits.cols(), rng);

  StgsSample out;
  out.relaxed = gumbel_softmax(logits, g, tau);

  const Mat z = logits.payload() + g;
  Mat hard = Mat::Zero(z.rows(), z.cols());
  out.index.resize(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int k = argmax_row(z.row(i));
    out.index[static_cast<std::size_t>(i)] = k;
    hard(i, k) = 1.0;
  }
  out.forward = straight_through(hard, out.relaxed);
  return out;
}

Var categorical_log_prob(const Var& logits, const std::vector<int>& index) {
  return gather_cols(log_softmax_rows(logits), index);
}

Var softmax_entropy_rows(const Var& logits) {
  const Var lp = log_softmax_rows(logits);
  const Var p = exp(lp);
  return neg(sum_rows(mul(p, lp)));
}

SquashedSample squashed_gaussian(const Var& mean, const Var& log_std, RngStream& rng) {
  if (mean.rows() != log_std.rows() || mean.cols() != log_std.cols()) {
    throw ShapeError("squashed_gaussian: mean " + shape_str(mean.payload()) + " vs log_std " +
                     shape_str(log_std.payload()));
  }
  const Var ls = clamp(log_std, -20.0, 2.0);
  const Var std_dev = exp(ls);

  Mat eps(mean.rows(), mean.cols());
  for (Eigen::Index i = 0; i < eps.rows(); ++i) {
    for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = rng.normal();
  }
  const Var eps_c = Var::constant(eps);

  const Var u = add(mean, mul(std_dev, eps_c));
  SquashedSample out;
  out.action = tanh(u);

  // Gaussian term: -0.5 eps^2 - log_std - 0.5 ln(2 pi), summed over k.
  const Var gauss = neg(add_scalar(add(scale(square(eps_c), 0.5), ls), kHalfLog2Pi));
  // tanh Jacobian: log(1 - tanh(u)^2) = 2 (ln 2 - u - softplus(-2u)).
  const Var log_jac = scale(add_scalar(neg(add(u, softplus(scale(u, -2.0)))), std::log(2.0)), 2.0);
  out.log_prob = sum_rows(sub(gauss, log_jac));
  return out;
}

}  // namespace intact
