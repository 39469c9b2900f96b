#include <doctest.h>

#include <cmath>

#include "intact/integer_action.hpp"
#include "support/oracles.hpp"

using namespace intact;

TEST_CASE("embedding T endpoints, midpoint, monotonicity") {
  for (const int n : {2, 9, 17, 33}) {
    CHECK(embed_index(0, n) == doctest::Approx(-1.0));
    CHECK(embed_index(n - 1, n) == doctest::Approx(1.0));
    for (int a = 1; a < n; ++a) {
      CHECK(embed_index(a, n) > embed_index(a - 1, n));  // strictly increasing
    }
  }
  CHECK(embed_index(8, 17) == doctest::Approx(0.0));
  CHECK_THROWS_AS(embed_index(0, 1), ConfigError);

  const Var v = embed(Var::constant(Mat::Constant(1, 1, 4.0)), 9);
  CHECK(v.payload()(0, 0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(embed(Var::constant(Mat::Zero(1, 1)), 1), ConfigError);
}

TEST_CASE("embed gradient is the constant 2/(N-1)") {
  Var x = Var::leaf(Mat::Constant(1, 1, 3.0), true);
  embed(x, 9).backward();
  CHECK(x.grad()(0, 0) == doctest::Approx(2.0 / 8.0));
}

TEST_CASE("integer_sample") {
  SUBCASE("value equals the sampled index") {
    RngStream init(3);
    Mat logits(64, 7);
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      for (Eigen::Index j = 0; j < logits.cols(); ++j) logits(i, j) = init.normal();
    }
    RngStream rng(10);
    const IntegerSample s = integer_sample(Var::constant(logits), 1.0, rng);
    for (Eigen::Index i = 0; i < 64; ++i) {
      CHECK(s.value.payload()(i, 0) == static_cast<double>(s.index[static_cast<std::size_t>(i)]));
    }
  }
  SUBCASE("degenerate logits pick the dominant bin") {
    Mat logits(10000, 2);
    logits.col(0).setConstant(-40.0);
    logits.col(1).setConstant(40.0);
    RngStream rng(4);
    const IntegerSample s = integer_sample(Var::constant(logits), 1.0, rng);
    long hits = 0;
    for (const int idx : s.index) hits += idx == 1;
    CHECK(static_cast<double>(hits) / 10000.0 > 0.999);
  }
  SUBCASE("gradient equals the relaxed ramp inner product, shared noise") {
    Mat payload(2, 5);
    payload << 0.3, -0.2, 1.0, 0.4, -0.8, -1.0, 0.1, 0.2, 0.9, 0.0;
    const std::uint64_t seed = 55;

    Var logits_a = Var::leaf(payload, true);
    RngStream ra(seed);
    const IntegerSample s = integer_sample(logits_a, 0.9, ra);
    sum(s.value).backward();

    Var logits_b = Var::leaf(payload, true);
    RngStream rb(seed);
    const Mat g = sample_gumbel(2, 5, rb);
    Mat ramp(5, 1);
    ramp << 0, 1, 2, 3, 4;
    sum(matmul(gumbel_softmax(logits_b, g, 0.9), Var::constant(ramp))).backward();

    CHECK((logits_a.grad() - logits_b.grad()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("assemble_action") {
  SUBCASE("forced index with embedding on") {
    Mat head(1, 2);
    head << -50.0, 50.0;
    const IntegerActionSpec spec({2}, true);
    RngStream rng(1);
    const AssembledAction a = assemble_action({Var::constant(head)}, spec, 1.0, rng);
    CHECK(a.action.payload()(0, 0) == doctest::Approx(1.0));  // T(1) with N=2
    CHECK(a.indices[0][0] == 1);
  }

  SUBCASE("device-table layout: K=3, N=(2,33,33)") {
    const IntegerActionSpec spec({2, 33, 33}, false);
    CHECK(spec.dims() == 3);
    CHECK(spec.logit_width() == 68);
    RngStream rng(2);
    std::vector<Var> heads;
    for (const int n : spec.bins) heads.push_back(Var::constant(Mat::Zero(4, n)));
    const AssembledAction a = assemble_action(heads, spec, 1.0, rng);
    CHECK(a.action.cols() == 3);  // K, never sum(N_k)
    CHECK(a.action.rows() == 4);
  }

  SUBCASE("log_prob of uniform heads factorizes") {
    const IntegerActionSpec spec({4, 4}, true);
    RngStream rng(3);
    const AssembledAction a = assemble_action(
        {Var::constant(Mat::Zero(1, 4)), Var::constant(Mat::Zero(1, 4))}, spec, 1.0, rng);
    CHECK(a.log_prob.payload()(0, 0) == doctest::Approx(2.0 * std::log(0.25)));
  }

  SUBCASE("head width mismatch is an error") {
    const IntegerActionSpec spec({3, 5}, true);
    RngStream rng(4);
    CHECK_THROWS_AS(assemble_action({Var::constant(Mat::Zero(1, 3)), Var::constant(Mat::Zero(1, 4))},
                                    spec, 1.0, rng),
                    ShapeError);
  }

  SUBCASE("dimensionality and range over randomized specs") {
    RngStream rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const int dims = 1 + rng.uniform_int(4);
      std::vector<int> bins;
      std::vector<bool> flags;
      for (int k = 0; k < dims; ++k) {
        bins.push_back(2 + rng.uniform_int(32));
        flags.push_back(rng.uniform_int(2) == 1);
      }
      const IntegerActionSpec spec(bins, flags);
      std::vector<Var> heads;
      for (const int n : bins) {
        Mat h(3, n);
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = rng.normal();
        }
        heads.push_back(Var::constant(h));
      }
      const AssembledAction a = assemble_action(heads, spec, 1.0, rng);
      CHECK(a.action.cols() == dims);
      for (Eigen::Index b = 0; b < 3; ++b) {
        for (int k = 0; k < dims; ++k) {
          const double v = a.action.payload()(b, k);
          const int idx = a.indices[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
          CHECK(idx >= 0);
          CHECK(idx < bins[static_cast<std::size_t>(k)]);
          if (flags[static_cast<std::size_t>(k)]) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
            CHECK(v == doctest::Approx(embed_index(idx, bins[static_cast<std::size_t>(k)])));
          } else {
            CHECK(v == static_cast<double>(idx));
          }
        }
      }
    }
  }

  SUBCASE("marginal law matches Softmax per dimension") {
    const int n_samples = 200000;
    Mat head0(n_samples, 3), head1(n_samples, 4);
    const std::vector<double> l0{1.0, 0.0, -1.0};
    const std::vector<double> l1{0.5, 0.5, -0.5, 0.0};
    for (int j = 0; j < 3; ++j) head0.col(j).setConstant(l0[static_cast<std::size_t>(j)]);
    for (int j = 0; j < 4; ++j) head1.col(j).setConstant(l1[static_cast<std::size_t>(j)]);
    const IntegerActionSpec spec({3, 4}, true);
    RngStream rng(6);
    const AssembledAction a =
        assemble_action({Var::constant(head0), Var::constant(head1)}, spec, 1.0, rng);
    std::vector<long> c0(3, 0), c1(4, 0);
    for (int i = 0; i < n_samples; ++i) {
      ++c0[static_cast<std::size_t>(a.indices[static_cast<std::size_t>(i)][0])];
      ++c1[static_cast<std::size_t>(a.indices[static_cast<std::size_t>(i)][1])];
    }
    std::vector<double> f0(3), f1(4);
    for (int k = 0; k < 3; ++k) f0[static_cast<std::size_t>(k)] = static_cast<double>(c0[static_cast<std::size_t>(k)]) / n_samples;
    for (int k = 0; k < 4; ++k) f1[static_cast<std::size_t>(k)] = static_cast<double>(c1[static_cast<std::size_t>(k)]) / n_samples;
    CHECK(test::tv_distance(f0, test::softmax_probs(l0)) < 0.01);
    CHECK(test::tv_distance(f1, test::softmax_probs(l1)) < 0.01);
  }

  SUBCASE("gradients do not cross dimensions") {
    Mat h0(2, 3), h1(2, 4);
    h0.setConstant(0.2);
    h1.setConstant(-0.1);
    Var head0 = Var::leaf(h0, true);
    Var head1 = Var::leaf(h1, true);
    const IntegerActionSpec spec({3, 4}, true);
    RngStream rng(7);
    const AssembledAction a = assemble_action({head0, head1}, spec, 1.0, rng);
    sum(slice_cols(a.action, 0, 1)).backward();  // only dimension 0 in the loss
    CHECK(head0.grad().cwiseAbs().maxCoeff() > 0.0);
    CHECK(head1.grad().cwiseAbs().maxCoeff() == 0.0);
  }
}
