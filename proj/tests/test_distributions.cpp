#include <doctest.h>

#include <cmath>
#include <numbers>

#include "intact/distributions.hpp"
#include "support/oracles.hpp"

using namespace intact;
using test::grad_discrepancy;

TEST_CASE("rng streams are deterministic and split independently") {
  RngStream a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream base(5);
  RngStream c1 = base.child("one");
  RngStream c2 = base.child("two");
  CHECK(c1.next_u64() != c2.next_u64());
  CHECK(base.child(7).seed() == base.child(7).seed());
}

TEST_CASE("gumbel sampler matches Gumbel(0,1) moments") {
  RngStream rng(2024);
  const Mat g = sample_gumbel(1000, 1000, rng);  // 1e6 draws
  const double mean = g.mean();
  const double var = (g.array() - mean).square().mean();
  constexpr double euler_mascheroni = 0.5772156649015329;
  CHECK(std::abs(mean - euler_mascheroni) < 0.01);
  CHECK(std::abs(var - std::numbers::pi * std::numbers::pi / 6.0) < 0.02);

  RngStream r1(9), r2(9);
  CHECK(sample_gumbel(2, 3, r1) == sample_gumbel(2, 3, r2));
}

TEST_CASE("gumbel_max follows Softmax(logits)") {
  SUBCASE("degenerate distribution") {
    const std::vector<double> logits{100.0, 0.0, 0.0};
    RngStream rng(1);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += gumbel_max(logits, rng) == 0;
    CHECK(static_cast<double>(hits) / 10000.0 > 0.999);
  }
  SUBCASE("uniform logits") {
    const std::vector<double> logits{0.0, 0.0, 0.0, 0.0};
    RngStream rng(2);
    std::vector<long> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(gumbel_max(logits, rng))];
    for (const long c : counts) {
      CHECK(std::abs(static_cast<double>(c) / n - 0.25) < 0.01);
    }
  }
  SUBCASE("total variation against closed form") {
    const std::vector<double> logits{1.0, 0.0, -1.0};
    const std::vector<double> probs = test::softmax_probs(logits);
    CHECK(probs[0] == doctest::Approx(0.6652).epsilon(1e-3));
    CHECK(probs[1] == doctest::Approx(0.2447).epsilon(1e-3));
    CHECK(probs[2] == doctest::Approx(0.0900).epsilon(1e-3));

    RngStream rng(3);
    const int n = 200000;
    std::vector<long> counts(3, 0);
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(gumbel_max(logits, rng))];
    std::vector<double> freq(3);
    for (int k = 0; k < 3; ++k) freq[static_cast<std::size_t>(k)] =
        static_cast<double>(counts[static_cast<std::size_t>(k)]) / n;
    CHECK(test::tv_distance(freq, probs) < 0.01);
  }
  SUBCASE("input validation") {
    RngStream rng(4);
    CHECK_THROWS_AS(gumbel_max(std::vector<double>{1.0}, rng), ShapeError);
    CHECK_THROWS_AS(gumbel_max(std::vector<double>{1.0, std::nan("")}, rng), DomainError);
  }
}

TEST_CASE("argmax ties break to the lowest index") {
  Eigen::RowVectorXd row(4);
  row << 2.0, 5.0, 5.0, 1.0;
  CHECK(argmax_row(row) == 1);
}

TEST_CASE("gumbel_softmax") {
  SUBCASE("symmetric case") {
    const Var out = gumbel_softmax(Var::constant(Mat::Zero(1, 2)), Mat::Zero(1, 2), 1.0);
    CHECK(out.payload()(0, 0) == doctest::Approx(0.5));
    CHECK(out.payload()(0, 1) == doctest::Approx(0.5));
  }
  SUBCASE("small temperature approaches one-hot") {
    Mat logits(1, 3);
    logits << 0.3, 1.1, -0.4;
    RngStream rng(8);
    const Mat g = sample_gumbel(1, 3, rng);
    const Var out = gumbel_softmax(Var::constant(logits), g, 0.01);
    Eigen::RowVectorXd z = logits.row(0) + g.row(0);
    const int hot = argmax_row(z);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(out.payload()(0, j) - (j == hot ? 1.0 : 0.0)) < 1e-6);
    }
  }
  SUBCASE("tau must be positive") {
    CHECK_THROWS_AS(gumbel_softmax(Var::constant(Mat::Zero(1, 2)), Mat::Zero(1, 2), 0.0),
                    ConfigError);
  }
  SUBCASE("gradient w.r.t. logits matches finite differences") {
    RngStream rng(12);
    Mat init(2, 4);
    for (Eigen::Index i = 0; i < init.size(); ++i) init(i / 4, i % 4) = rng.normal();
    Var logits = Var::leaf(init, true);
    const Mat g = sample_gumbel(2, 4, rng);
    Mat w(2, 4);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i / 4, i % 4) = rng.normal();
    const auto forward = [&] { return sum(mul(gumbel_softmax(logits, g, 0.7), Var::constant(w))); };
    Var loss = forward();
    loss.backward();
    const Mat numeric = test::finite_diff_grad(logits, [&] { return forward().item(); });
    CHECK(grad_discrepancy(logits.grad(), numeric) < 1e-4);
  }
}

TEST_CASE("straight-through gumbel-softmax") {
  RngStream init(77);
  Mat logits_payload(3, 6);
  for (Eigen::Index i = 0; i < logits_payload.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits_payload.cols(); ++j) logits_payload(i, j) = init.normal();
  }

  SUBCASE("forward payload is exactly one-hot") {
    Var logits = Var::leaf(logits_payload, true);
    RngStream rng(100);
    const StgsSample s = stgs(logits, 1.0, rng);
    for (Eigen::Index i = 0; i < 3; ++i) {
      int ones = 0;
      for (Eigen::Index j = 0; j < 6; ++j) {
        const double v = s.forward.payload()(i, j);
        CHECK((v == 0.0 || v == 1.0));
        ones += v == 1.0;
      }
      CHECK(ones == 1);
      CHECK(s.forward.payload()(i, s.index[static_cast<std::size_t>(i)]) == 1.0);
    }
  }

  SUBCASE("index agrees with gumbel_max under shared noise") {
    Mat one_row = logits_payload.row(0);
    Var logits = Var::leaf(one_row, true);
    const std::uint64_t seed = 4242;
    RngStream r1(seed), r2(seed);
    const StgsSample s = stgs(logits, 1.0, r1);
    const std::vector<double> lvec(one_row.data(), one_row.data() + one_row.size());
    CHECK(s.index[0] == gumbel_max(lvec, r2));
  }

  SUBCASE("gradient equals the relaxation's gradient exactly") {
    RngStream mrng(55);
    for (int trial = 0; trial < 20; ++trial) {
      const auto seed = static_cast<std::uint64_t>(1000 + trial);
      Mat m(3, 6);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = mrng.normal();
      }

      Var logits_st = Var::leaf(logits_payload, true);
      RngStream ra(seed);
      const StgsSample s = stgs(logits_st, 0.8, ra);
      inner_product(Var::constant(m), s.forward).backward();

      Var logits_gs = Var::leaf(logits_payload, true);
      RngStream rb(seed);
      const Mat g = sample_gumbel(3, 6, rb);
      const Var relaxed = gumbel_softmax(logits_gs, g, 0.8);
      inner_product(Var::constant(m), relaxed).backward();

      const Mat ga = logits_st.grad();
      const Mat gb = logits_gs.grad();
      for (Eigen::Index i = 0; i < ga.rows(); ++i) {
        for (Eigen::Index j = 0; j < ga.cols(); ++j) {
          const double denom = std::max(std::abs(ga(i, j)), std::abs(gb(i, j)));
          if (denom > 0.0) {
            CHECK(std::abs(ga(i, j) - gb(i, j)) / denom <= 1e-12);
          }
        }
      }
    }
  }

  SUBCASE("forward and relaxed share one draw inside a single sample") {
    Var logits = Var::leaf(logits_payload, true);
    RngStream rng(31);
    const StgsSample s = stgs(logits, 1.0, rng);
    // The hard index must be the argmax of the relaxation (same noise).
    for (Eigen::Index i = 0; i < 3; ++i) {
      CHECK(s.index[static_cast<std::size_t>(i)] == argmax_row(s.relaxed.payload().row(i)));
    }
  }
}

TEST_CASE("categorical_log_prob") {
  SUBCASE("uniform logits") {
    const Var lp = categorical_log_prob(Var::constant(Mat::Zero(1, 4)), {2});
    CHECK(lp.payload()(0, 0) == doctest::Approx(std::log(0.25)));
  }
  SUBCASE("closed-form softmax value") {
    Mat logits(1, 3);
    logits << 1.0, 0.0, -1.0;
    const Var lp = categorical_log_prob(Var::constant(logits), {0});
    CHECK(lp.payload()(0, 0) == doctest::Approx(std::log(test::softmax_probs({1.0, 0.0, -1.0})[0])));
    CHECK(lp.payload()(0, 0) == doctest::Approx(-0.4076).epsilon(1e-3));
  }
  SUBCASE("probabilities normalize") {
    Mat logits(1, 5);
    logits << 0.4, -1.2, 2.0, 0.0, -0.3;
    double total = 0.0;
    for (int k = 0; k < 5; ++k) {
      total += std::exp(categorical_log_prob(Var::constant(logits), {k}).payload()(0, 0));
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(categorical_log_prob(Var::constant(Mat::Zero(1, 4)), {4}), std::out_of_range);
  }
}

TEST_CASE("softmax_entropy_rows bounds") {
  Mat logits(2, 8);
  logits.row(0).setZero();          // uniform: H = ln 8
  logits.row(1).setZero();
  logits(1, 3) = 40.0;              // nearly deterministic: H ~ 0
  const Var h = softmax_entropy_rows(Var::constant(logits));
  CHECK(h.payload()(0, 0) == doctest::Approx(std::log(8.0)));
  CHECK(h.payload()(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(h.payload()(1, 0) >= 0.0);
}

TEST_CASE("squashed gaussian") {
  SUBCASE("vanishing std is deterministic tanh(mean)") {
    Mat mean(1, 3);
    mean << 0.5, -1.0, 2.0;
    RngStream rng(6);
    const auto s = squashed_gaussian(Var::constant(mean), Var::constant(Mat::Constant(1, 3, -40.0)), rng);
    for (int k = 0; k < 3; ++k) {
      CHECK(s.action.payload()(0, k) == doctest::Approx(std::tanh(mean(0, k))));
    }
  }

  SUBCASE("actions stay strictly inside (-1, 1)") {
    RngStream rng(7);
    const auto s = squashed_gaussian(Var::constant(Mat::Constant(200, 2, 0.0)),
                                     Var::constant(Mat::Constant(200, 2, 1.5)), rng);
    CHECK((s.action.payload().array().abs() < 1.0).all());
  }

  SUBCASE("log_prob matches the closed-form density and the histogram") {
    const double mu = 0.3;
    const double sigma = 0.6;
    const int n = 1000000;
    RngStream rng(99);
    const auto s = squashed_gaussian(Var::constant(Mat::Constant(n, 1, mu)),
                                     Var::constant(Mat::Constant(n, 1, std::log(sigma))), rng);

    // density oracle: p(a) = N(atanh a; mu, sigma) / (1 - a^2)
    const auto density = [&](double a) {
      const double u = std::atanh(a);
      const double z = (u - mu) / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi)) / (1.0 - a * a);
    };

    // op's log_prob vs the oracle at each of the first samples
    for (int i = 0; i < 1000; ++i) {
      const double a = s.action.payload()(i, 0);
      CHECK(s.log_prob.payload()(i, 0) == doctest::Approx(std::log(density(a))).epsilon(1e-7));
    }

    // histogram vs oracle on interior bins
    const int bins = 40;
    std::vector<long> counts(bins, 0);
    for (int i = 0; i < n; ++i) {
      const double a = s.action.payload()(i, 0);
      const int b = std::min(bins - 1, static_cast<int>((a + 1.0) / 2.0 * bins));
      ++counts[static_cast<std::size_t>(b)];
    }
    const double width = 2.0 / bins;
    int checked = 0;
    for (int b = 0; b < bins; ++b) {
      const double mass = static_cast<double>(counts[static_cast<std::size_t>(b)]) / n;
      if (mass < 0.01) continue;  // interior bins only
      const double center = -1.0 + (b + 0.5) * width;
      const double empirical = mass / width;
      CHECK(std::abs(empirical - density(center)) / density(center) < 0.03);
      ++checked;
    }
    CHECK(checked > 5);
  }

  SUBCASE("gradients flow through mean and log_std") {
    Mat m0(2, 2), ls0(2, 2);
    m0 << 0.1, -0.4, 0.8, 0.0;
    ls0 << -0.5, -1.0, 0.2, -0.2;
    Var mu = Var::leaf(m0, true);
    Var log_std = Var::leaf(ls0, true);
    const std::uint64_t seed = 321;
    const auto forward = [&] {
      RngStream r(seed);
      const auto s = squashed_gaussian(mu, log_std, r);
      return add(sum(s.log_prob), sum(s.action));
    };
    forward().backward();
    const Mat analytic_mu = mu.grad();
    const Mat analytic_ls = log_std.grad();
    const Mat gm = test::finite_diff_grad(mu, [&] { return forward().item(); });
    const Mat gl = test::finite_diff_grad(log_std, [&] { return forward().item(); });
    CHECK(grad_discrepancy(analytic_mu, gm) < 1e-4);
    CHECK(grad_discrepancy(analytic_ls, gl) < 1e-4);
  }
}
