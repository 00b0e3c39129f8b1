#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gofscreen/error.hpp"
#include "gofscreen/group_lasso.hpp"
#include "gofscreen/iterative.hpp"
#include "gofscreen/rng.hpp"
#include "gofscreen/simbench.hpp"

using namespace gofscreen;

namespace {

Dataset noise_dataset(std::size_t n, std::size_t p, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  d.y.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.x.rows(); ++i)
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) d.x(i, j) = u(gen);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y[i] = z(gen);
  d.column_names = default_column_names(p);
  return d;
}

bool contains_all(const std::vector<std::size_t>& set, const std::vector<std::size_t>& truth) {
  return std::all_of(truth.begin(), truth.end(), [&](std::size_t j) {
    return std::binary_search(set.begin(), set.end(), j);
  });
}

// Gradient of the mean loss with respect to the linear predictor.
Eigen::VectorXd loss_gradient(const LossSpec& spec, const AdditiveBlocks& blocks,
                              const GroupLassoFit& fit, std::span<const double> y) {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(y.size()),
                                                  fit.intercept);
  for (std::size_t g = 0; g < blocks.bases.size(); ++g) eta += blocks.bases[g] * fit.theta[g];
  Eigen::VectorXd d(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    d[i] = loss_deriv(spec, eta[i], y[static_cast<std::size_t>(i)]) / static_cast<double>(y.size());
  return d;
}

}  // namespace

TEST_CASE("conditional screen with nothing selected is the marginal screen") {
  const auto sim = gen_dataset({5, 300, 40, 3});
  for (const auto& spec : {LossSpec::poisson(), LossSpec::gaussian(), LossSpec::quantile(0.5)}) {
    const auto marginal = screen_all(sim.data, spec, 6);
    const auto conditional = conditional_screen(sim.data, {}, spec, 6);
    for (std::size_t j = 0; j < 40; ++j)
      CHECK(std::abs(conditional.stats[j] - marginal.stats[j]) <= 1e-8);
  }
}

TEST_CASE("a duplicated selected covariate adds nothing") {
  auto sim = gen_dataset({1, 300, 10, 4});
  sim.data.x.col(7) = sim.data.x.col(0);
  for (const auto& spec : {LossSpec::gaussian(), LossSpec::quantile(0.75)}) {
    const std::vector<std::size_t> selected{0};
    const auto res = conditional_screen(sim.data, selected, spec, 6);
    CHECK(std::isinf(res.stats[0]));
    CHECK(res.stats[7] <= 1e-8);
    CHECK(res.stats[7] >= -1e-8);
  }
}

TEST_CASE("conditioning rescues the fourth covariate of model 2") {
  int first = 0;
  for (std::size_t rep = 0; rep < 10; ++rep) {
    const auto sim = gen_dataset({2, 400, 200, replication_seed(31, rep)});
    const std::vector<std::size_t> selected{0, 1, 2};
    const auto res = conditional_screen(sim.data, selected, LossSpec::gaussian(), 6);
    first += res.ranking.front() == 3;
  }
  CHECK(first >= 6);
}

TEST_CASE("group-penalized refit") {
  const auto sim = gen_dataset({1, 400, 50, 5});
  const std::vector<std::size_t> truth{0, 1, 2, 3};
  SUBCASE("huge penalty removes everything") {
    const std::vector<double> grid{1e10};
    CHECK(penalized_refit(sim.data, truth, LossSpec::gaussian(), 6, grid).empty());
  }
  SUBCASE("no penalty keeps every true block") {
    const auto blocks = build_additive_blocks(sim.data, truth, 6);
    const auto fit = fit_group_lasso(blocks, sim.data.response(), LossSpec::gaussian(), 0.0);
    CHECK(fit.active == truth);
    const std::vector<double> grid{1e-12};
    CHECK(penalized_refit(sim.data, truth, LossSpec::gaussian(), 6, grid) == truth);
  }
  SUBCASE("blocks are centered and orthonormal") {
    const auto blocks = build_additive_blocks(sim.data, truth, 6);
    for (const auto& q : blocks.bases) {
      const Eigen::MatrixXd gram = q.transpose() * q / 400.0;
      CHECK((gram - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(q.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("group lasso fits satisfy the stationarity conditions") {
  for (const auto& spec : {LossSpec::gaussian(), LossSpec::logistic(), LossSpec::poisson()}) {
    const int model = spec.kind == LossKind::gaussian ? 1
                      : spec.kind == LossKind::logistic ? 3
                                                        : 5;
    const auto sim = gen_dataset({model, 400, 12, 6});
    std::vector<std::size_t> all(12);
    for (std::size_t j = 0; j < 12; ++j) all[j] = j;
    const auto blocks = build_additive_blocks(sim.data, all, 6);
    const auto y = sim.data.response();
    const double lmax = group_lambda_max(blocks, y, spec);
    const auto grid = default_penalty_grid(lmax, 8, 1e-2);
    const auto path = group_lasso_path(blocks, y, spec, grid);
    REQUIRE(path.front().active.empty());
    for (const auto& fit : path) {
      const Eigen::VectorXd d = loss_gradient(spec, blocks, fit, y);
      CHECK(std::abs(d.sum()) <= 1e-6);
      for (std::size_t g = 0; g < blocks.bases.size(); ++g) {
        const Eigen::VectorXd grad = blocks.bases[g].transpose() * d;
        const double w = std::sqrt(static_cast<double>(blocks.bases[g].cols()));
        const double norm = fit.theta[g].norm();
        if (norm > 0) {
          const Eigen::VectorXd kkt = grad + fit.lambda * w * fit.theta[g] / norm;
          CHECK(kkt.norm() <= 1e-6);
        } else {
          CHECK(grad.norm() <= fit.lambda * w + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("refit agrees with exhaustive best-subset search") {
  // Oracle: unpenalized least squares on every subset of the 8 candidates,
  // scored by 2 n mean_loss + ln(n) (1 + parameters).
  int refit_truth = 0, oracle_truth = 0, agree = 0;
  const std::vector<std::size_t> candidates{0, 1, 2, 3, 10, 20, 30, 40};
  const std::vector<std::size_t> truth{0, 1, 2, 3};
  for (std::size_t rep = 0; rep < 10; ++rep) {
    const auto sim = gen_dataset({1, 400, 50, replication_seed(41, rep)});
    const auto picked = penalized_refit(sim.data, candidates, LossSpec::gaussian(), 6);
    const Eigen::Index n = 400;
    std::vector<Eigen::MatrixXd> raw;
    for (auto j : candidates)
      raw.push_back(design_matrix(make_basis(sim.data.column(j), 6), sim.data.column(j), j, true)
                        .values);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_set;
    for (unsigned mask = 0; mask < 256; ++mask) {
      std::vector<std::size_t> set;
      Eigen::MatrixXd x(n, 1 + 5 * std::popcount(mask));
      x.col(0).setOnes();
      Eigen::Index at = 1;
      for (unsigned g = 0; g < 8; ++g) {
        if (!(mask >> g & 1u)) continue;
        set.push_back(candidates[g]);
        x.middleCols(at, 5) = raw[g];
        at += 5;
      }
      const Eigen::VectorXd fit = x * x.colPivHouseholderQr().solve(sim.data.y);
      const double mean_loss = 0.5 * (sim.data.y - fit).squaredNorm() / n;
      const double crit = 2.0 * n * mean_loss + std::log(400.0) * static_cast<double>(x.cols());
      if (crit < best) {
        best = crit;
        best_set = set;
      }
    }
    refit_truth += picked == truth;
    oracle_truth += best_set == truth;
    agree += picked == best_set;
  }
  CHECK(refit_truth >= 6);
  CHECK(oracle_truth >= 6);
  CHECK(agree >= 6);
}

TEST_CASE("iteration on pure noise stops quickly with a tiny model") {
  for (unsigned seed = 0; seed < 3; ++seed) {
    const auto d = noise_dataset(200, 100, 50 + seed);
    IterativeOptions opts;
    opts.seed = seed;
    const auto res = run_iterative(d, LossSpec::gaussian(), 6, opts);
    CHECK(res.trace.rounds.size() <= 2);
    CHECK(res.selected.size() <= 3);
  }
}

TEST_CASE("greedy rounds add at most one covariate") {
  const auto sim = gen_dataset({2, 400, 300, 7});
  IterativeOptions opts;
  opts.greedy_cap = 1;
  opts.seed = 3;
  const auto res = run_iterative(sim.data, LossSpec::gaussian(), 6, opts);
  std::size_t previous = 0;
  for (const auto& round : res.trace.rounds) {
    CHECK(round.screened.size() <= 1);
    CHECK(round.selected.size() <= previous + 1);
    previous = round.selected.size();
  }
}

TEST_CASE("iteration is deterministic across thread counts") {
  const auto sim = gen_dataset({2, 300, 200, 8});
  IterativeOptions a, b;
  a.seed = b.seed = 99;
  a.parallel.threads = 1;
  b.parallel.threads = 3;
  const auto ra = run_iterative(sim.data, LossSpec::gaussian(), 6, a);
  const auto rb = run_iterative(sim.data, LossSpec::gaussian(), 6, b);
  CHECK(ra.selected == rb.selected);
  REQUIRE(ra.trace.rounds.size() == rb.trace.rounds.size());
  for (std::size_t r = 0; r < ra.trace.rounds.size(); ++r) {
    CHECK(ra.trace.rounds[r].threshold == rb.trace.rounds[r].threshold);
    CHECK(ra.trace.rounds[r].screened == rb.trace.rounds[r].screened);
    CHECK(ra.trace.rounds[r].selected == rb.trace.rounds[r].selected);
  }
  CHECK(ra.trace.stop == rb.trace.stop);
}

TEST_CASE("a size cap of one stops after the first round") {
  const auto sim = gen_dataset({5, 400, 200, 9});
  IterativeOptions opts;
  opts.max_model_size = 1;
  const auto res = run_iterative(sim.data, LossSpec::poisson(), 6, opts);
  CHECK(res.trace.rounds.size() == 1);
  CHECK(res.selected.size() >= 1);
  CHECK(res.trace.stop == StopReason::max_size);
}

TEST_CASE("options and defaults") {
  CHECK(default_max_model_size(400, 6) == 12);
  IterativeOptions bad;
  bad.n_perm = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfiguration);
  bad = {};
  bad.penalty_grid = {0.1, 0.5};
  CHECK_THROWS_AS(bad.validate(), InvalidConfiguration);
  bad = {};
  bad.perm_quantile = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfiguration);
  CHECK(stop_reason_name(StopReason::no_change) == "no_change");
}

TEST_CASE("greedy iteration on model 5 keeps the true covariates") {
  int covered = 0;
  for (std::size_t rep = 0; rep < 40; ++rep) {
    const std::uint64_t seed = replication_seed(51, rep);
    const auto sim = gen_dataset({5, 400, 1000, seed});
    IterativeOptions opts;
    opts.greedy_cap = 1;
    opts.seed = mix_seed(seed);
    const auto res = run_iterative(sim.data, LossSpec::poisson(), 6, opts);
    for (const auto& round : res.trace.rounds) REQUIRE(round.screened.size() <= 1);
    covered += contains_all(res.selected, sim.truth);
  }
  CHECK(covered >= 36);
}
