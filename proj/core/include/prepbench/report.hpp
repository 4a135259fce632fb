#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prepbench/executor.hpp"
#include "prepbench/metrics.hpp"
#include "prepbench/orchestrator.hpp"

namespace prepbench {
namespace report {

enum class ReportKind {
  SpeedupByStage,
  SpeedupByPreparator,
  IoRuntime,
  EagerVsLazy,
  ScalabilityCurves,
  MinConfigMatrix,
  TpchBars,
  CompatibilityMatrix,
};

const char* to_string(ReportKind k);
std::optional<ReportKind> report_kind_from_string(const std::string& s);

struct ReportSpec {
  ReportKind kind = ReportKind::SpeedupByStage;
  std::vector<std::filesystem::path> inputs;  // results roots / sweep JSON files
  std::filesystem::path output;
  std::string format = "svg";  // svg | png | csv | md
  std::string baseline_engine = "columnar";
  /// Engines excluded from report tables (the correctness oracle stays out
  /// of benchmark reports unless asked for).
  std::vector<std::string> exclude_engines = {"reference"};
};

/// Renders the report; figures get a machine-readable CSV sibling
/// (<output>.csv). Deterministic for identical inputs. Throws
/// IncompleteResults naming what is missing.
std::filesystem::path render(const ReportSpec& spec);

}  // namespace report
}  // namespace prepbench
