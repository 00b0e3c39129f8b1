#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "gofscreen/error.hpp"
#include "gofscreen/rng.hpp"
#include "gofscreen/simbench.hpp"
#include "oracles/ks.hpp"

using namespace gofscreen;

namespace {

constexpr double kPi = std::numbers::pi;

// Component functions written out independently of the library.
double sine_ratio(double x) {
  return std::sin(2 * kPi * x) / (2 - std::sin(2 * kPi * x));
}

double trig_mix(double x) {
  const double s = std::sin(2 * kPi * x), c = std::cos(2 * kPi * x);
  return 0.1 * s + 0.2 * c + 0.3 * std::pow(s, 2) + 0.4 * std::pow(c, 3) + 0.5 * std::pow(s, 3);
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

double sample_variance(const Eigen::VectorXd& v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

ScreeningResult ranked(std::vector<std::size_t> ranking) {
  ScreeningResult r;
  r.ranking = std::move(ranking);
  r.stats.assign(r.ranking.size(), 0.0);
  r.degenerate.assign(r.ranking.size(), 0);
  return r;
}

}  // namespace

TEST_CASE("component functions at known points") {
  CHECK(eval_f(1, 0.3) == 0.3);
  CHECK(eval_f(2, 0.5) == 0.0);
  CHECK(eval_f(2, 0.0) == 1.0);
  CHECK(eval_f(3, 0.25) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eval_f(3, 0.75) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(eval_f(5, 0.5) == 1.0);
  CHECK(eval_f(4, 0.0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(eval_f(6, 0.25) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(eval_f(7, 1.0) == 0.0);
  CHECK(eval_f(8, 1.5) == 0.0);
  CHECK(eval_f(9, 0.0) == 1.0);
  for (double x : {0.1, 0.37, 0.9}) {
    CHECK(eval_f(3, x) == doctest::Approx(sine_ratio(x)).epsilon(1e-14));
    CHECK(eval_f(4, x) == doctest::Approx(trig_mix(x)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(eval_f(0, 0.5), InvalidConfiguration);
  CHECK_THROWS_AS(eval_f(10, 0.5), InvalidConfiguration);
}

TEST_CASE("model 1 noise variance is 1.74") {
  const auto sim = gen_dataset({1, 1000000, 4, 1});
  const auto& x = sim.data.x;
  Eigen::VectorXd resid(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double signal = 5 * x(i, 0) + 3 * std::pow(2 * x(i, 1) - 1, 2) +
                          4 * sine_ratio(x(i, 2)) + 6 * trig_mix(x(i, 3));
    resid[i] = sim.data.y[i] - signal;
  }
  CHECK(std::abs(sample_variance(resid) / 1.74 - 1.0) <= 0.01);
  CHECK(std::abs(resid.mean()) <= 0.01);
  CHECK(sim.truth == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("model 2 covariates are bounded and positively correlated") {
  const auto sim = gen_dataset({2, 10000, 6, 2});
  const auto& x = sim.data.x;
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x.maxCoeff() <= 1.0);
  for (Eigen::Index a = 0; a < 6; ++a)
    for (Eigen::Index b = a + 1; b < 6; ++b) CHECK(correlation(x.col(a), x.col(b)) > 0.05);
}

TEST_CASE("model 3 responses follow the logistic link") {
  const auto sim = gen_dataset({3, 200000, 4, 3});
  const auto& x = sim.data.x;
  const auto& y = sim.data.y;
  CHECK(sim.data.response_kind == ResponseKind::binary01);
  std::vector<std::pair<double, double>> prob_and_y;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    REQUIRE((y[i] == 0.0 || y[i] == 1.0));
    const double logit = 2 * x(i, 0) + 3 * std::sin(x(i, 1) - 1) +
                         2 * std::pow(x(i, 2) - 1.5, 2) +
                         3.5 * 2 * std::cos(x(i, 3)) / (2 - std::sin(x(i, 3)));
    prob_and_y.emplace_back(1 / (1 + std::exp(-logit)), y[i]);
  }
  // Calibration by deciles of the true probability.
  std::sort(prob_and_y.begin(), prob_and_y.end());
  const std::size_t bin = prob_and_y.size() / 10;
  for (std::size_t b = 0; b < 10; ++b) {
    double mp = 0, my = 0;
    for (std::size_t i = b * bin; i < (b + 1) * bin; ++i) {
      mp += prob_and_y[i].first;
      my += prob_and_y[i].second;
    }
    CHECK(std::abs(mp - my) / static_cast<double>(bin) <= 0.015);
  }
}

TEST_CASE("uniform covariates pass a Kolmogorov-Smirnov check") {
  for (int model : {1, 5}) {
    const auto sim = gen_dataset({model, 100000, 4, 40u + static_cast<unsigned>(model)});
    for (Eigen::Index j = 0; j < 4; ++j) {
      const Eigen::VectorXd col = sim.data.x.col(j);
      const std::vector<double> v(col.data(), col.data() + col.size());
      const double d = oracle::ks_uniform_statistic(v, 0.0, 1.0);
      CHECK(oracle::ks_pvalue(d, 100000.0) >= 1e-3);
    }
  }
}

TEST_CASE("models 7 and 8 have AR(1) covariates and heteroscedastic noise") {
  CHECK_THROWS_AS(gen_dataset({7, 100, 21, 1}), InvalidConfiguration);
  for (int model : {7, 8}) {
    const auto sim = gen_dataset({model, 200000, 22, 70u + static_cast<unsigned>(model)});
    const auto& x = sim.data.x;
    CHECK(sim.truth == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(sim.scale_truth == std::vector<std::size_t>{19, 20, 21});
    CHECK(correlation(x.col(4), x.col(5)) == doctest::Approx(0.8).epsilon(0.01));
    CHECK(correlation(x.col(4), x.col(6)) == doctest::Approx(0.64).epsilon(0.02));
    CHECK(sample_variance(x.col(10)) == doctest::Approx(1.0).epsilon(0.01));
    Eigen::VectorXd z(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double mean = 5 * x(i, 0) + 3 * std::pow(2 * x(i, 1) - 1, 2) +
                          4 * sine_ratio(x(i, 2)) + 4 * std::exp(x(i, 3) - 0.5);
      const double s = std::sin(2 * kPi * x(i, 19)), c = std::cos(2 * kPi * x(i, 19));
      const double scale = 0.5 * std::exp(0.1 * s * s + 0.4 * c * c * c +
                                          std::sin(x(i, 20) - 1) + std::pow(x(i, 21) - 1.5, 2));
      z[i] = (sim.data.y[i] - mean) / scale;
    }
    // Standard normal for model 7; Laplace with scale 2 (variance 8) for model 8.
    const double expected = model == 7 ? 1.0 : 8.0;
    CHECK(sample_variance(z) == doctest::Approx(expected).epsilon(0.03));
    CHECK(std::abs(z.mean()) <= 0.03);
  }
}

TEST_CASE("generator validation") {
  CHECK_THROWS_AS(gen_dataset({0, 100, 10, 1}), InvalidConfiguration);
  CHECK_THROWS_AS(gen_dataset({9, 100, 10, 1}), InvalidConfiguration);
  CHECK_THROWS_AS(gen_dataset({1, 100, 3, 1}), InvalidConfiguration);
  CHECK_THROWS_AS(gen_dataset({1, 0, 10, 1}), InvalidConfiguration);
  const auto a = gen_dataset({4, 50, 10, 9});
  const auto b = gen_dataset({4, 50, 10, 9});
  const auto c = gen_dataset({4, 50, 10, 10});
  CHECK(a.data.x == b.data.x);
  CHECK(a.data.y == b.data.y);
  CHECK(a.data.x != c.data.x);
}

TEST_CASE("default losses") {
  CHECK(default_loss(1).kind == LossKind::gaussian);
  CHECK(default_loss(4).kind == LossKind::logistic);
  CHECK(default_loss(6).kind == LossKind::poisson);
  CHECK(default_loss(8).kind == LossKind::quantile);
  CHECK(default_loss(7).alpha == 0.75);
  CHECK_THROWS_AS(default_loss(0), InvalidConfiguration);
}

TEST_CASE("minimum model size") {
  CHECK(minimum_model_size(ranked({0, 1, 4, 5, 6, 7, 2, 3, 8, 9}), std::vector<std::size_t>{0, 1, 2, 3}) == 8);
  CHECK(minimum_model_size(ranked({3, 2, 1, 0, 4}), std::vector<std::size_t>{0, 1, 2, 3}) == 4);
  CHECK(minimum_model_size(ranked({0, 1, 2, 3, 4, 6, 7, 8, 9, 5}), std::vector<std::size_t>{5}) == 10);
  CHECK_THROWS_AS(minimum_model_size(ranked({0, 1}), std::vector<std::size_t>{}),
                  InvalidConfiguration);
  CHECK_THROWS_AS(minimum_model_size(ranked({0, 1}), std::vector<std::size_t>{2}),
                  InvalidConfiguration);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(type7_quantile(v, 0.0) == 1.0);
  CHECK(type7_quantile(v, 0.25) == 1.75);
  CHECK(type7_quantile(v, 0.5) == 2.5);
  CHECK(type7_quantile(v, 0.75) == 3.25);
  CHECK(type7_quantile(v, 1.0) == 4.0);
  CHECK(type7_quantile({5}, 0.3) == 5.0);
  CHECK_THROWS_AS(type7_quantile({}, 0.5), InvalidConfiguration);

  const std::vector<std::size_t> sizes{4, 4, 5, 7, 20};
  const auto s = summarize(sizes);
  CHECK(s.median == 5.0);
  CHECK(s.q25 == 4.0);
  CHECK(s.q75 == 7.0);
  CHECK(s.iqr == 3.0);
  CHECK(s.q05 == 4.0);
  CHECK(s.q95 == doctest::Approx(17.4).epsilon(1e-12));
}

TEST_CASE("replication seeds") {
  CHECK(replication_seed(7, 0) == mix_seed(7));
  CHECK(replication_seed(7, 5) == (mix_seed(7) ^ 5u));
  CHECK(replication_seed(7, 1) != replication_seed(8, 1));
}

TEST_CASE("benchmark summaries") {
  const ScreenMethod method{LossSpec::poisson(), 6, {}};
  SUBCASE("one replication") {
    const auto b = run_benchmark({5, 200, 50, 0}, 1, method, 3);
    REQUIRE(b.sizes.size() == 1);
    CHECK(b.seeds == std::vector<std::uint64_t>{replication_seed(3, 0)});
    const double s = static_cast<double>(b.sizes[0]);
    CHECK(b.summary.median == s);
    CHECK(b.summary.q05 == s);
    CHECK(b.summary.q95 == s);
    CHECK(b.summary.iqr == 0.0);
    CHECK(b.sizes[0] >= 4);
    // The replication equals a direct screen of the same data.
    const auto sim = gen_dataset({5, 200, 50, b.seeds[0]});
    CHECK(b.sizes[0] == minimum_model_size(screen_all(sim.data, method.loss, 6), sim.truth));
  }
  SUBCASE("bit-identical across thread counts") {
    const auto a = run_benchmark({5, 200, 100, 0}, 8, method, 11, {1});
    const auto b = run_benchmark({5, 200, 100, 0}, 8, method, 11, {4});
    CHECK(a.sizes == b.sizes);
    CHECK(a.seeds == b.seeds);
    CHECK(a.summary.median == b.summary.median);
    CHECK(a.summary.q95 == b.summary.q95);
    CHECK(a.failed == 0);
  }
  SUBCASE("models 7 and 8 score the scale set separately") {
    const auto b = run_benchmark({8, 200, 40, 0}, 3, {LossSpec::quantile(0.75), 6, {}}, 5);
    REQUIRE(b.scale_sizes.size() == 3);
    REQUIRE(b.union_sizes.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(b.scale_sizes[r] >= 3);
      CHECK(b.union_sizes[r] == std::max(b.sizes[r], b.scale_sizes[r]));
    }
  }
  CHECK_THROWS_AS(run_benchmark({5, 200, 50, 0}, 0, method, 3), InvalidConfiguration);
}
