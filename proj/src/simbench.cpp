#include "gofscreen/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

#include "gofscreen/error.hpp"
#include "gofscreen/rng.hpp"

namespace gofscreen {

namespace {

using Eigen::Index;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRandomEffectWeight = 0.4;
constexpr double kAr1 = 0.8;

void fill_uniform(Dataset& d, Philox& rng, double lo, double hi) {
  for (Index j = 0; j < d.x.cols(); ++j) {
    for (Index i = 0; i < d.x.rows(); ++i) d.x(i, j) = rng.uniform(lo, hi);
  }
}

// X_j = (W_j + t U) / (1 + t) with one shared U per observation.
void fill_random_effects(Dataset& d, Philox& rng, double lo, double hi) {
  const Index n = d.x.rows();
  Eigen::VectorXd u(n);
  for (Index i = 0; i < n; ++i) u[i] = rng.uniform();
  for (Index j = 0; j < d.x.cols(); ++j) {
    for (Index i = 0; i < n; ++i) {
      d.x(i, j) = (rng.uniform(lo, hi) + kRandomEffectWeight * u[i]) /
                  (1.0 + kRandomEffectWeight);
    }
  }
}

// Rows of N(0, Sigma) with Sigma_ij = 0.8^|i-j|, via the AR(1) recursion.
void fill_ar1_normal(Dataset& d, Philox& rng) {
  const double innovation = std::sqrt(1.0 - kAr1 * kAr1);
  for (Index i = 0; i < d.x.rows(); ++i) {
    double prev = rng.normal();
    d.x(i, 0) = prev;
    for (Index j = 1; j < d.x.cols(); ++j) {
      prev = kAr1 * prev + innovation * rng.normal();
      d.x(i, j) = prev;
    }
  }
}

}  // namespace

double eval_f(int k, double x) {
  const double s = std::sin(kTwoPi * x);
  const double c = std::cos(kTwoPi * x);
  switch (k) {
    case 1: return x;
    case 2: return (2 * x - 1) * (2 * x - 1);
    case 3: return s / (2 - s);
    case 4: return 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
    case 5: return std::exp(x - 0.5);
    case 6: return 0.1 * s * s + 0.4 * c * c * c;
    case 7: return std::sin(x - 1);
    case 8: return (x - 1.5) * (x - 1.5);
    case 9: return 2 * std::cos(x) / (2 - std::sin(x));
    default:
      throw InvalidConfiguration("component function index must be in 1..9");
  }
}

LossSpec default_loss(int model_id) {
  switch (model_id) {
    case 1: case 2: return LossSpec::gaussian();
    case 3: case 4: return LossSpec::logistic();
    case 5: case 6: return LossSpec::poisson();
    case 7: case 8: return LossSpec::quantile(0.75);
    default: throw InvalidConfiguration("model id must be in 1..8");
  }
}

SimData gen_dataset(const SimModel& model) {
  const int id = model.model_id;
  if (id < 1 || id > 8) throw InvalidConfiguration("model id must be in 1..8");
  const std::size_t min_p = id >= 7 ? 22 : 4;
  if (model.p < min_p) {
    throw InvalidConfiguration("model " + std::to_string(id) + " needs p >= " +
                               std::to_string(min_p));
  }
  if (model.n == 0) throw InvalidConfiguration("n must be positive");

  Philox rng(model.seed, 0);
  const auto n = static_cast<Index>(model.n);
  SimData sim;
  Dataset& d = sim.data;
  d.x.resize(n, static_cast<Index>(model.p));
  d.y.resize(n);
  d.column_names = default_column_names(model.p);
  sim.truth = {0, 1, 2, 3};

  switch (id) {
    case 1: case 5: fill_uniform(d, rng, 0.0, 1.0); break;
    case 2: case 6: fill_random_effects(d, rng, 0.0, 1.0); break;
    case 3: fill_uniform(d, rng, -2.5, 2.5); break;
    case 4: fill_random_effects(d, rng, -2.5, 2.5); break;
    default: fill_ar1_normal(d, rng); break;
  }

  const auto x = [&](Index i, int j) { return d.x(i, j - 1); };
  for (Index i = 0; i < n; ++i) {
    switch (id) {
      case 1: case 2:
        d.y[i] = 5 * eval_f(1, x(i, 1)) + 3 * eval_f(2, x(i, 2)) + 4 * eval_f(3, x(i, 3)) +
                 6 * eval_f(4, x(i, 4)) + std::sqrt(1.74) * rng.normal();
        break;
      case 3: case 4: {
        const double logit = 2 * eval_f(1, x(i, 1)) + 3 * eval_f(7, x(i, 2)) +
                             2 * eval_f(8, x(i, 3)) + 3.5 * eval_f(9, x(i, 4));
        d.y[i] = rng.bernoulli(detail::sigmoid(logit)) ? 1.0 : 0.0;
        break;
      }
      case 5: case 6: {
        const double log_mean = eval_f(1, x(i, 1)) + eval_f(3, x(i, 2)) +
                                eval_f(5, x(i, 3)) + eval_f(6, x(i, 4));
        d.y[i] = static_cast<double>(rng.poisson(std::exp(log_mean)));
        break;
      }
      default: {
        const double mean = 5 * eval_f(1, x(i, 1)) + 3 * eval_f(2, x(i, 2)) +
                            4 * eval_f(3, x(i, 3)) + 4 * eval_f(5, x(i, 4));
        const double scale =
            0.5 * std::exp(eval_f(6, x(i, 20)) + eval_f(7, x(i, 21)) + eval_f(8, x(i, 22)));
        const double noise = id == 7 ? rng.normal() : rng.laplace(2.0);
        d.y[i] = mean + scale * noise;
        break;
      }
    }
  }
  if (id >= 7) sim.scale_truth = {19, 20, 21};
  d.response_kind = infer_response_kind(d.response());
  return sim;
}

std::size_t minimum_model_size(const ScreeningResult& result,
                               std::span<const std::size_t> truth) {
  if (truth.empty()) throw InvalidConfiguration("true model must not be empty");
  std::vector<std::size_t> position(result.ranking.size());
  for (std::size_t r = 0; r < result.ranking.size(); ++r) position[result.ranking[r]] = r;
  std::size_t worst = 0;
  for (std::size_t j : truth) {
    if (j >= position.size()) throw InvalidConfiguration("true index out of range");
    worst = std::max(worst, position[j] + 1);
  }
  return worst;
}

double type7_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw InvalidConfiguration("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

QuantileSummary summarize(std::span<const std::size_t> sizes) {
  const std::vector<double> v(sizes.begin(), sizes.end());
  QuantileSummary s;
  s.median = type7_quantile(v, 0.5);
  s.q05 = type7_quantile(v, 0.05);
  s.q25 = type7_quantile(v, 0.25);
  s.q75 = type7_quantile(v, 0.75);
  s.q95 = type7_quantile(v, 0.95);
  s.iqr = s.q75 - s.q25;
  return s;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep) {
  return mix_seed(master_seed) ^ static_cast<std::uint64_t>(rep);
}

BenchmarkSummary run_benchmark(const SimModel& model, std::size_t reps,
                               const ScreenMethod& method, std::uint64_t master_seed,
                               const ParallelOptions& parallel) {
  if (reps < 1) throw InvalidConfiguration("need at least one replication");
  method.solver.validate();

  struct Rep {
    bool ok = false;
    std::size_t size = 0, scale = 0, both = 0;
  };
  std::vector<Rep> outcomes(reps);
  const int threads = parallel.threads > 0 ? parallel.threads : omp_get_max_threads();
  const auto count = static_cast<std::ptrdiff_t>(reps);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    SimModel m = model;
    m.seed = replication_seed(master_seed, static_cast<std::size_t>(r));
    Rep& out = outcomes[static_cast<std::size_t>(r)];
    try {
      const SimData sim = gen_dataset(m);
      const Dataset data = prepare_for_loss(sim.data, method.loss);
      const ScreeningResult result =
          screen_all(data, method.loss, method.num_basis, method.solver);
      out.size = minimum_model_size(result, sim.truth);
      if (!sim.scale_truth.empty()) {
        out.scale = minimum_model_size(result, sim.scale_truth);
        std::vector<std::size_t> both = sim.truth;
        both.insert(both.end(), sim.scale_truth.begin(), sim.scale_truth.end());
        out.both = minimum_model_size(result, both);
      }
      out.ok = true;
    } catch (const Error&) {
      out.ok = false;
    }
  }

  BenchmarkSummary summary;
  for (std::size_t r = 0; r < reps; ++r) {
    if (!outcomes[r].ok) {
      ++summary.failed;
      continue;
    }
    summary.sizes.push_back(outcomes[r].size);
    summary.seeds.push_back(replication_seed(master_seed, r));
    if (model.model_id >= 7) {
      summary.scale_sizes.push_back(outcomes[r].scale);
      summary.union_sizes.push_back(outcomes[r].both);
    }
  }
  if (summary.sizes.empty()) throw NumericalError("every replication failed");
  summary.summary = summarize(summary.sizes);
  return summary;
}

}  // namespace gofscreen
