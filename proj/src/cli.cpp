#include "gofscreen/cli.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "gofscreen/bspline.hpp"
#include "gofscreen/csv.hpp"
#include "gofscreen/error.hpp"
#include "gofscreen/iterative.hpp"
#include "gofscreen/report.hpp"
#include "gofscreen/screening.hpp"
#include "gofscreen/simbench.hpp"

namespace gofscreen {

namespace {

struct CommonArgs {
  std::string loss;
  double alpha = std::nan("");
  int num_basis = 0;
  int threads = 0;
  std::uint64_t seed = 1;
  std::string out;
  std::string table;
};

struct DataArgs {
  std::string input;
  std::string response;
  bool no_header = false;
};

struct ScreenArgs {
  std::string threshold = "perm";
  int perms = 1;
  double perm_quantile = 1.0;
};

struct IterateArgs {
  std::size_t greedy_cap = 0;
  std::size_t max_size = 0;
  int max_rounds = 10;
  std::vector<double> penalty_grid;
};

struct SimulateArgs {
  int model = 1;
  std::size_t n = 400;
  std::size_t p = 1000;
  std::size_t reps = 100;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool loss_required) {
  auto* loss = cmd->add_option("--loss", a.loss, "gaussian|logistic|poisson|expclass|quantile")
                   ->check(CLI::IsMember({"gaussian", "logistic", "poisson", "expclass",
                                          "quantile"}));
  if (loss_required) loss->required();
  cmd->add_option("--alpha", a.alpha, "quantile level for --loss quantile");
  cmd->add_option("--dn", a.num_basis, "spline basis size (default ceil(n^(1/5))+2)");
  cmd->add_option("--threads", a.threads, "worker threads (default: all)");
  cmd->add_option("--seed", a.seed, "random seed");
  cmd->add_option("--out", a.out, "structured (JSON) result file")->required();
  cmd->add_option("--table", a.table, "tabular (CSV) result file (default: --out with .csv)");
}

void add_data(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--input", a.input, "CSV file")->required();
  cmd->add_option("--response", a.response, "response column name or 1-based number")
      ->required();
  cmd->add_flag("--no-header", a.no_header, "the CSV has no header row");
}

LossSpec resolve_loss(const std::string& name, double alpha) {
  const auto kind = parse_loss_kind(name);
  if (!kind) throw UsageError("unknown loss '" + name + "'");
  if (*kind == LossKind::quantile) {
    if (std::isnan(alpha)) throw UsageError("--loss quantile requires --alpha");
    return LossSpec::quantile(alpha);
  }
  if (!std::isnan(alpha)) throw UsageError("--alpha only applies to --loss quantile");
  return {*kind, 0.5};
}

std::string table_path(const CommonArgs& a) {
  if (!a.table.empty()) return a.table;
  std::filesystem::path path(a.out);
  if (path.extension() == ".csv") return a.out + ".table.csv";
  path.replace_extension(".csv");
  return path.string();
}

Dataset load_input(const DataArgs& d, const LossSpec& loss) {
  Dataset data = load_csv(d.input, d.response, !d.no_header);
  data.validate();
  return prepare_for_loss(std::move(data), loss);
}

int num_basis_for(const CommonArgs& a, std::size_t n) {
  const int dn = a.num_basis > 0 ? a.num_basis : default_num_basis(n);
  if (dn < kDefaultDegree + 1) throw UsageError("--dn must be at least 4");
  return dn;
}

void print_top(std::ostream& out, const ScreenReport& report, std::size_t k) {
  const auto& r = report.result;
  out << "top covariates:";
  for (std::size_t rank = 0; rank < std::min(k, r.ranking.size()); ++rank) {
    const std::size_t j = r.ranking[rank];
    out << ' ' << (j < report.names.size() ? report.names[j] : std::to_string(j + 1));
  }
  out << '\n';
}

int run_screen(const CommonArgs& common, const DataArgs& data_args, const ScreenArgs& sa,
               std::ostream& out) {
  const LossSpec loss = resolve_loss(common.loss, common.alpha);
  const Dataset data = load_input(data_args, loss);
  const int dn = num_basis_for(common, data.n());
  const ParallelOptions parallel{common.threads};
  const SolverOptions solver;

  ScreenReport report;
  report.command = "screen";
  report.loss = loss;
  report.n = data.n();
  report.p = data.p();
  report.num_basis = dn;
  report.seed = common.seed;
  report.names = data.column_names;
  report.result = screen_all(data, loss, dn, solver, parallel);

  const std::string& rule = sa.threshold;
  if (rule == "perm") {
    if (sa.perms < 1) throw UsageError("--perms must be at least 1");
    report.threshold_rule = "perm";
    report.perms = sa.perms;
    apply_threshold(report.result,
                    permutation_threshold(data, loss, dn, sa.perms, sa.perm_quantile,
                                          common.seed, solver, parallel));
  } else if (rule.starts_with("manual:")) {
    report.threshold_rule = "manual";
    double value;
    try {
      value = std::stod(rule.substr(7));
    } catch (const std::exception&) {
      throw UsageError("bad manual threshold '" + rule + "'");
    }
    apply_threshold(report.result, value);
  } else if (rule.starts_with("topk:")) {
    report.threshold_rule = "topk";
    long k;
    try {
      k = std::stol(rule.substr(5));
    } catch (const std::exception&) {
      throw UsageError("bad top-k rule '" + rule + "'");
    }
    if (k < 1) throw UsageError("top-k needs k >= 1");
    auto& r = report.result;
    r.selected = select_top_k(r, static_cast<std::size_t>(k));
    // The k-th ranked statistic acts as the threshold.
    double cut = -std::numeric_limits<double>::infinity();
    for (std::size_t j : r.selected) cut = cut == -std::numeric_limits<double>::infinity()
                                               ? r.stats[j]
                                               : std::min(cut, r.stats[j]);
    r.threshold = cut;
  } else {
    throw UsageError("--threshold must be perm, manual:V or topk:K");
  }

  write_text_file(common.out, to_json_text(report));
  write_text_file(table_path(common), to_csv_text(report));
  out << "screened " << report.p << " covariates (n=" << report.n << ", dn=" << dn
      << ", loss=" << loss_name(loss.kind) << ")\n";
  print_top(out, report, 10);
  out << "selected " << report.result.selected.size() << " covariates at threshold "
      << format_double(report.result.threshold.value_or(0.0)) << '\n';
  return kExitOk;
}

int run_iterate(const CommonArgs& common, const DataArgs& data_args, const ScreenArgs& sa,
                const IterateArgs& ia, std::ostream& out) {
  const LossSpec loss = resolve_loss(common.loss, common.alpha);
  const Dataset data = load_input(data_args, loss);
  const int dn = num_basis_for(common, data.n());

  IterativeOptions options;
  options.max_model_size = ia.max_size;
  options.greedy_cap = ia.greedy_cap;
  options.n_perm = sa.perms;
  options.perm_quantile = sa.perm_quantile;
  options.penalty_grid = ia.penalty_grid;
  options.seed = common.seed;
  options.max_rounds = ia.max_rounds;
  options.parallel.threads = common.threads;

  ScreenReport report;
  report.command = "iterate";
  report.loss = loss;
  report.n = data.n();
  report.p = data.p();
  report.num_basis = dn;
  report.threshold_rule = "perm";
  report.perms = sa.perms;
  report.seed = common.seed;
  report.names = data.column_names;
  report.iterative = run_iterative(data, loss, dn, options);
  // First-round marginal statistics; selection is the final model.
  report.result = screen_all(data, loss, dn, options.solver, options.parallel);
  const auto& rounds = report.iterative->trace.rounds;
  if (!rounds.empty()) report.result.threshold = rounds.front().threshold;
  report.result.selected = report.iterative->selected;

  write_text_file(common.out, to_json_text(report));
  write_text_file(table_path(common), to_csv_text(report));
  out << "iterated " << rounds.size() << " rounds, stop: "
      << stop_reason_name(report.iterative->trace.stop) << '\n';
  out << "selected:";
  for (std::size_t j : report.iterative->selected) out << ' ' << report.names[j];
  out << '\n';
  return kExitOk;
}

int run_simulate(const CommonArgs& common, const SimulateArgs& s, std::ostream& out) {
  const LossSpec loss =
      common.loss.empty() ? default_loss(s.model) : resolve_loss(common.loss, common.alpha);
  if (common.loss.empty() && !std::isnan(common.alpha)) {
    throw UsageError("--alpha requires --loss quantile");
  }
  if (s.reps < 1) throw UsageError("--reps must be at least 1");
  SimulateReport report;
  report.model = {s.model, s.n, s.p, common.seed};
  report.reps = s.reps;
  report.num_basis = num_basis_for(common, s.n);
  report.loss = loss;
  const ScreenMethod method{loss, report.num_basis, {}};
  report.bench =
      run_benchmark(report.model, s.reps, method, common.seed, {common.threads});

  write_text_file(common.out, to_json_text(report));
  write_text_file(table_path(common), to_csv_text(report));
  const auto& q = report.bench.summary;
  out << "model " << s.model << ", n=" << s.n << ", p=" << s.p << ", reps="
      << report.bench.sizes.size() << " (failed " << report.bench.failed << ")\n";
  out << "minimum model size median " << format_double(q.median) << " (IQR "
      << format_double(q.iqr) << "), 5/25/75/95%: " << format_double(q.q05) << ' '
      << format_double(q.q25) << ' ' << format_double(q.q75) << ' ' << format_double(q.q95)
      << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Goodness-of-fit feature screening with marginal B-spline fits"};
  app.require_subcommand(1);

  CommonArgs screen_common, iterate_common, sim_common;
  DataArgs screen_data, iterate_data;
  ScreenArgs screen_args, iterate_screen;
  IterateArgs iterate_args;
  SimulateArgs sim_args;

  auto* screen = app.add_subcommand("screen", "rank covariates and select a model");
  add_data(screen, screen_data);
  add_common(screen, screen_common, true);
  screen->add_option("--threshold", screen_args.threshold, "perm | manual:V | topk:K");
  screen->add_option("--perms", screen_args.perms, "permutation rounds");
  screen->add_option("--perm-quantile", screen_args.perm_quantile,
                     "quantile of pooled permuted statistics (1 = max)");

  auto* iterate = app.add_subcommand("iterate", "iterative screening with penalized refits");
  add_data(iterate, iterate_data);
  add_common(iterate, iterate_common, true);
  iterate->add_option("--perms", iterate_screen.perms, "permutation rounds per step");
  iterate->add_option("--perm-quantile", iterate_screen.perm_quantile,
                      "quantile of pooled permuted statistics (1 = max)");
  iterate->add_option("--greedy-cap", iterate_args.greedy_cap,
                      "covariates admitted per round (0 = unlimited)");
  iterate->add_option("--max-size", iterate_args.max_size,
                      "model size cap (default ceil(n/(dn ln n)))");
  iterate->add_option("--max-rounds", iterate_args.max_rounds, "round limit");
  iterate->add_option("--penalty-grid", iterate_args.penalty_grid,
                      "decreasing positive penalties (default: 20-point path)")
      ->delimiter(',');

  auto* simulate = app.add_subcommand("simulate", "minimum-model-size benchmark");
  add_common(simulate, sim_common, false);
  simulate->add_option("--model", sim_args.model, "simulation model 1..8")
      ->required()
      ->check(CLI::Range(1, 8));
  simulate->add_option("--n", sim_args.n, "sample size");
  simulate->add_option("--p", sim_args.p, "number of covariates");
  simulate->add_option("--reps", sim_args.reps, "replications");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*screen) return run_screen(screen_common, screen_data, screen_args, out);
    if (*iterate) {
      return run_iterate(iterate_common, iterate_data, iterate_screen, iterate_args, out);
    }
    return run_simulate(sim_common, sim_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace gofscreen
