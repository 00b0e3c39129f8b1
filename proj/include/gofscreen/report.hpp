#pragma once

// Result files.  Every command writes a JSON document tagged with
// "format" and "version", plus a comma-separated table.  Covariate indices
// in files are 1-based; -infinity statistics are written as null.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gofscreen/iterative.hpp"
#include "gofscreen/loss.hpp"
#include "gofscreen/screening.hpp"
#include "gofscreen/simbench.hpp"

namespace gofscreen {

inline constexpr int kReportVersion = 1;
inline constexpr const char* kReportFormat = "gofscreen-result";

struct ScreenReport {
  std::string command = "screen";  // "screen" or "iterate"
  LossSpec loss;
  std::size_t n = 0;
  std::size_t p = 0;
  int num_basis = 0;
  std::string threshold_rule;  // "perm", "manual" or "topk"
  int perms = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> names;
  ScreeningResult result;
  /// iterate only
  std::optional<IterativeResult> iterative;
};

struct SimulateReport {
  SimModel model;  // model.seed holds the master seed
  std::size_t reps = 0;
  int num_basis = 0;
  LossSpec loss;
  BenchmarkSummary bench;
};

std::string to_json_text(const ScreenReport& report);
std::string to_json_text(const SimulateReport& report);
ScreenReport parse_screen_report(const std::string& json_text);
SimulateReport parse_simulate_report(const std::string& json_text);

/// rank,index,name,stat,selected,converged,degenerate
std::string to_csv_text(const ScreenReport& report);
/// replication,seed,min_model_size[,scale_min_model_size,union_min_model_size]
std::string to_csv_text(const SimulateReport& report);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace gofscreen
