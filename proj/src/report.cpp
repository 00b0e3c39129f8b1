#include "gofscreen/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "gofscreen/error.hpp"

namespace gofscreen {

namespace {

using nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_neg_inf(const json& j) {
  return j.is_null() ? kNegInf : j.get<double>();
}

json one_based(const std::vector<std::size_t>& indices) {
  json out = json::array();
  for (std::size_t j : indices) out.push_back(j + 1);
  return out;
}

std::vector<std::size_t> zero_based(const json& j) {
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(v.get<std::size_t>() - 1);
  return out;
}

json loss_json(const LossSpec& loss) {
  json out = {{"kind", loss_name(loss.kind)}};
  out["alpha"] = loss.kind == LossKind::quantile ? json(loss.alpha) : json(nullptr);
  return out;
}

LossSpec loss_from_json(const json& j) {
  const auto kind = parse_loss_kind(j.at("kind").get<std::string>());
  if (!kind) throw DataError("unknown loss in result file");
  if (*kind == LossKind::quantile) return LossSpec::quantile(j.at("alpha").get<double>());
  return {*kind, 0.5};
}

json summary_json(const QuantileSummary& s) {
  return {{"median", s.median}, {"iqr", s.iqr}, {"q05", s.q05},
          {"q25", s.q25},       {"q75", s.q75}, {"q95", s.q95}};
}

QuantileSummary summary_from_json(const json& j) {
  QuantileSummary s;
  s.median = j.at("median").get<double>();
  s.iqr = j.at("iqr").get<double>();
  s.q05 = j.at("q05").get<double>();
  s.q25 = j.at("q25").get<double>();
  s.q75 = j.at("q75").get<double>();
  s.q95 = j.at("q95").get<double>();
  return s;
}

void check_header(const json& doc, const char* command) {
  if (doc.value("format", "") != kReportFormat) throw DataError("not a gofscreen result file");
  if (doc.value("version", 0) != kReportVersion) {
    throw DataError("unsupported result file version");
  }
  if (command != nullptr && doc.value("command", "") != command) {
    throw DataError(std::string("result file is not from the '") + command + "' command");
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

std::string to_json_text(const ScreenReport& report) {
  const ScreeningResult& r = report.result;
  json doc;
  doc["format"] = kReportFormat;
  doc["version"] = kReportVersion;
  doc["command"] = report.command;
  doc["loss"] = loss_json(report.loss);
  doc["n"] = report.n;
  doc["p"] = report.p;
  doc["dn"] = report.num_basis;
  doc["threshold"] = {{"rule", report.threshold_rule},
                      {"value", r.threshold ? number_or_null(*r.threshold) : json(nullptr)},
                      {"perms", report.perms},
                      {"seed", report.seed}};
  json covariates = json::array();
  for (std::size_t rank = 0; rank < r.ranking.size(); ++rank) {
    const std::size_t j = r.ranking[rank];
    covariates.push_back({{"rank", rank + 1},
                          {"index", j + 1},
                          {"name", j < report.names.size() ? report.names[j] : ""},
                          {"stat", number_or_null(r.stats[j])},
                          {"converged", r.converged.empty() ? false : bool(r.converged[j])},
                          {"degenerate", r.degenerate.empty() ? false : bool(r.degenerate[j])}});
  }
  doc["covariates"] = std::move(covariates);
  doc["selected"] = one_based(r.selected);
  if (report.iterative) {
    const IterativeResult& it = *report.iterative;
    json rounds = json::array();
    for (const auto& round : it.trace.rounds) {
      rounds.push_back({{"screened", one_based(round.screened)},
                        {"selected", one_based(round.selected)},
                        {"threshold", number_or_null(round.threshold)}});
    }
    doc["trace"] = {{"rounds", std::move(rounds)},
                    {"stop", stop_reason_name(it.trace.stop)}};
    doc["final_selected"] = one_based(it.selected);
  }
  return dump(doc);
}

ScreenReport parse_screen_report(const std::string& json_text) {
  const json doc = json::parse(json_text);
  check_header(doc, nullptr);
  ScreenReport report;
  report.command = doc.at("command").get<std::string>();
  report.loss = loss_from_json(doc.at("loss"));
  report.n = doc.at("n").get<std::size_t>();
  report.p = doc.at("p").get<std::size_t>();
  report.num_basis = doc.at("dn").get<int>();
  const json& threshold = doc.at("threshold");
  report.threshold_rule = threshold.at("rule").get<std::string>();
  report.perms = threshold.at("perms").get<int>();
  report.seed = threshold.at("seed").get<std::uint64_t>();

  ScreeningResult& r = report.result;
  const json& covariates = doc.at("covariates");
  const std::size_t p = covariates.size();
  r.stats.assign(p, kNegInf);
  r.converged.assign(p, 0);
  r.degenerate.assign(p, 0);
  r.ranking.assign(p, 0);
  report.names.assign(p, "");
  for (const auto& c : covariates) {
    const std::size_t j = c.at("index").get<std::size_t>() - 1;
    const std::size_t rank = c.at("rank").get<std::size_t>() - 1;
    if (j >= p || rank >= p) throw DataError("covariate index out of range in result file");
    r.ranking[rank] = j;
    r.stats[j] = number_or_neg_inf(c.at("stat"));
    r.converged[j] = c.at("converged").get<bool>();
    r.degenerate[j] = c.at("degenerate").get<bool>();
    report.names[j] = c.at("name").get<std::string>();
  }
  // A threshold of -inf and "no threshold" both serialize as null; the rule
  // tells them apart.
  if (!threshold.at("value").is_null()) {
    r.threshold = threshold.at("value").get<double>();
  } else if (!report.threshold_rule.empty()) {
    r.threshold = kNegInf;
  }
  r.selected = zero_based(doc.at("selected"));

  if (doc.contains("trace")) {
    IterativeResult it;
    for (const auto& round : doc.at("trace").at("rounds")) {
      RoundRecord rec;
      rec.screened = zero_based(round.at("screened"));
      rec.selected = zero_based(round.at("selected"));
      rec.threshold = number_or_neg_inf(round.at("threshold"));
      it.trace.rounds.push_back(std::move(rec));
    }
    const auto stop = doc.at("trace").at("stop").get<std::string>();
    for (auto reason : {StopReason::max_size, StopReason::no_change, StopReason::max_rounds}) {
      if (stop_reason_name(reason) == stop) it.trace.stop = reason;
    }
    it.selected = zero_based(doc.at("final_selected"));
    report.iterative = std::move(it);
  }
  return report;
}

std::string to_json_text(const SimulateReport& report) {
  const BenchmarkSummary& b = report.bench;
  json doc;
  doc["format"] = kReportFormat;
  doc["version"] = kReportVersion;
  doc["command"] = "simulate";
  doc["model"] = report.model.model_id;
  doc["n"] = report.model.n;
  doc["p"] = report.model.p;
  doc["seed"] = report.model.seed;
  doc["reps"] = report.reps;
  doc["dn"] = report.num_basis;
  doc["loss"] = loss_json(report.loss);
  doc["failed"] = b.failed;
  json reps = json::array();
  for (std::size_t r = 0; r < b.sizes.size(); ++r) {
    json rec = {{"seed", b.seeds[r]}, {"min_model_size", b.sizes[r]}};
    if (!b.scale_sizes.empty()) {
      rec["scale_min_model_size"] = b.scale_sizes[r];
      rec["union_min_model_size"] = b.union_sizes[r];
    }
    reps.push_back(std::move(rec));
  }
  doc["replications"] = std::move(reps);
  doc["summary"] = summary_json(b.summary);
  if (!b.scale_sizes.empty()) {
    doc["scale_summary"] = summary_json(summarize(b.scale_sizes));
    doc["union_summary"] = summary_json(summarize(b.union_sizes));
  }
  return dump(doc);
}

SimulateReport parse_simulate_report(const std::string& json_text) {
  const json doc = json::parse(json_text);
  check_header(doc, "simulate");
  SimulateReport report;
  report.model.model_id = doc.at("model").get<int>();
  report.model.n = doc.at("n").get<std::size_t>();
  report.model.p = doc.at("p").get<std::size_t>();
  report.model.seed = doc.at("seed").get<std::uint64_t>();
  report.reps = doc.at("reps").get<std::size_t>();
  report.num_basis = doc.at("dn").get<int>();
  report.loss = loss_from_json(doc.at("loss"));
  BenchmarkSummary& b = report.bench;
  b.failed = doc.at("failed").get<std::size_t>();
  for (const auto& rec : doc.at("replications")) {
    b.seeds.push_back(rec.at("seed").get<std::uint64_t>());
    b.sizes.push_back(rec.at("min_model_size").get<std::size_t>());
    if (rec.contains("scale_min_model_size")) {
      b.scale_sizes.push_back(rec.at("scale_min_model_size").get<std::size_t>());
      b.union_sizes.push_back(rec.at("union_min_model_size").get<std::size_t>());
    }
  }
  b.summary = summary_from_json(doc.at("summary"));
  return report;
}

std::string to_csv_text(const ScreenReport& report) {
  const ScreeningResult& r = report.result;
  std::vector<std::uint8_t> chosen(r.stats.size(), 0);
  for (std::size_t j : r.selected) chosen[j] = 1;
  std::ostringstream out;
  out << "rank,index,name,stat,selected,converged,degenerate\n";
  for (std::size_t rank = 0; rank < r.ranking.size(); ++rank) {
    const std::size_t j = r.ranking[rank];
    std::string name = j < report.names.size() ? report.names[j] : "";
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      name = quoted + "\"";
    }
    out << rank + 1 << ',' << j + 1 << ',' << name << ',' << format_double(r.stats[j]) << ','
        << int(chosen[j]) << ',' << int(r.converged.empty() ? 0 : r.converged[j]) << ','
        << int(r.degenerate.empty() ? 0 : r.degenerate[j]) << '\n';
  }
  return out.str();
}

std::string to_csv_text(const SimulateReport& report) {
  const BenchmarkSummary& b = report.bench;
  const bool scale = !b.scale_sizes.empty();
  std::ostringstream out;
  out << "replication,seed,min_model_size";
  if (scale) out << ",scale_min_model_size,union_min_model_size";
  out << '\n';
  for (std::size_t r = 0; r < b.sizes.size(); ++r) {
    out << r + 1 << ',' << b.seeds[r] << ',' << b.sizes[r];
    if (scale) out << ',' << b.scale_sizes[r] << ',' << b.union_sizes[r];
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace gofscreen
