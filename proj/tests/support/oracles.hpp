#pragma once

// Test-only oracles, independent of the library's backward pass:
// central finite differences, value iteration, brute-force GAE.

#include <cmath>
#include <functional>
#include <vector>

#include "intact/autodiff.hpp"

namespace intact::test {

// Central finite differences of a scalar-valued forward pass w.r.t. one
// parameter's payload. `forward` must rebuild its graph on every call.
inline Mat finite_diff_grad(Var& param, const std::function<double()>& forward, double h = 1e-5) {
  Mat g(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double saved = param.payload()(i, j);
      param.payload()(i, j) = saved + h;
      const double fp = forward();
      param.payload()(i, j) = saved - h;
      const double fm = forward();
      param.payload()(i, j) = saved;
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

// Max discrepancy: relative error, except elements
// where both grads are below `abs_small` compare absolutely (scaled so the
// shared tolerance applies).
inline double grad_discrepancy(const Mat& analytic, const Mat& numeric, double rel_tol = 1e-4,
                               double abs_small = 1e-8, double abs_tol = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
    for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
      const double a = analytic(i, j);
      const double n = numeric(i, j);
      const double diff = std::abs(a - n);
      double err;
      if (std::abs(a) < abs_small && std::abs(n) < abs_small) {
        err = diff / abs_tol * rel_tol;  // passes iff diff < abs_tol
      } else {
        err = diff / std::max(std::abs(a), std::abs(n));
      }
      worst = std::max(worst, err);
    }
  }
  return worst;
}

// Exact Q values of a finite MDP by value iteration.
//   transition[s][a] -> next state (deterministic), reward[s][a].
struct TabularMdp {
  std::vector<std::vector<int>> next;
  std::vector<std::vector<double>> reward;
  double gamma = 0.9;

  std::vector<std::vector<double>> q_star(int sweeps = 10000) const {
    const std::size_t ns = next.size();
    const std::size_t na = next.front().size();
    std::vector<std::vector<double>> q(ns, std::vector<double>(na, 0.0));
    for (int it = 0; it < sweeps; ++it) {
      auto prev = q;
      for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t a = 0; a < na; ++a) {
          const int s2 = next[s][a];
          double best = prev[static_cast<std::size_t>(s2)][0];
          for (std::size_t a2 = 1; a2 < na; ++a2) {
            best = std::max(best, prev[static_cast<std::size_t>(s2)][a2]);
          }
          q[s][a] = reward[s][a] + gamma * best;
        }
      }
    }
    return q;
  }
};

// O(n^2) double-loop GAE, the reference for the recursive implementation.
inline std::vector<double> gae_brute_force(const std::vector<double>& rewards,
                                           const std::vector<double>& values,
                                           const std::vector<double>& dones,
                                           double bootstrap_value, double gamma, double lam) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next_v = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    delta[t] = rewards[t] + gamma * next_v * (1.0 - dones[t]) - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double coef = 1.0;
    for (std::size_t l = t; l < n; ++l) {
      adv[t] += coef * delta[l];
      if (dones[l] > 0.5) break;
      coef *= gamma * lam;
    }
  }
  return adv;
}

// Total-variation distance between two probability vectors.
inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
  return 0.5 * d;
}

// Pearson chi-square statistic for observed counts vs expected probabilities.
inline double chi_square_stat(const std::vector<long>& counts, const std::vector<double>& probs,
                              long total) {
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(total);
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

inline std::vector<double> softmax_probs(const std::vector<double>& logits) {
  double m = logits[0];
  for (const double v : logits) m = std::max(m, v);
  double z = 0.0;
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace intact::test
