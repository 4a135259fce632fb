#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prepbench/value.hpp"

namespace prepbench {

/// The four pipeline phases: input/output, exploratory data analysis,
/// data transformation, data cleaning.
enum class Stage { IO, EDA, DT, DC };

const char* to_string(Stage s);
std::optional<Stage> stage_from_string(const std::string& s);

/// The canonical vocabulary of 27 data-preparation operations.
enum class Preparator {
  Read, Write,                                                          // I/O
  IsNa, Outlier, SrchPtn, Sort, GetCols, DTypes, Stats, Query,          // EDA
  Cast, Drop, Rename, Pivot, CalcCol, Join, OneHot, CatEnc, Group,      // DT
  ChDate, DropNa, SetCase, Norm, Dedup, FillNa, Replace, Edit,          // DC
};

inline constexpr std::size_t kPreparatorCount = 27;

/// All 27 preparators in canonical (stage-grouped) order.
const std::array<Preparator, kPreparatorCount>& all_preparators();

const char* to_string(Preparator p);
std::optional<Preparator> preparator_from_string(const std::string& name);

Stage stage_of(Preparator p);

/// Members of one stage, in canonical order.
std::vector<Preparator> preparators_of(Stage s);

/// How an engine covers a preparator relative to the baseline API. Ordered
/// for reporting: FullMatch > DifferentInterface > CustomImplemented.
enum class CompatibilityLevel { CustomImplemented = 0, DifferentInterface = 1, FullMatch = 2 };

const char* to_string(CompatibilityLevel c);

/// One step of a pipeline: a preparator plus its validated named arguments.
struct PreparatorCall {
  Preparator op = Preparator::Read;
  nlohmann::json args = nlohmann::json::object();

  bool operator==(const PreparatorCall&) const = default;
};

struct DatasetRef {
  std::string path;
  std::string format = "csv";  // csv | parquet

  bool operator==(const DatasetRef&) const = default;
};

/// An ordered, validated sequence of preparator invocations bound to a
/// dataset. Immutable after load; safe to share across threads.
struct PipelineSpec {
  std::string name;
  DatasetRef dataset;
  std::vector<PreparatorCall> steps;
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const PipelineSpec&) const = default;
};

/// Parses and validates a pipeline file. Errors: ParseError on malformed
/// JSON, ValidationError on unknown preparators, bad arguments or step-order
/// violations (read must be first, write last, steps non-empty).
PipelineSpec load_pipeline(const std::filesystem::path& path);

PipelineSpec parse_pipeline(const nlohmann::json& doc);

nlohmann::json serialize_pipeline(const PipelineSpec& spec);

/// Validates one call against the preparator's parameter schema and returns
/// the call with defaults filled in. `step_label` feeds error messages.
PreparatorCall validate_call(const PreparatorCall& call, const std::string& step_label = "");

/// Structural validation of a whole spec (step order, per-step args).
/// Returns the spec with per-step defaults normalized in.
PipelineSpec validate_pipeline(const PipelineSpec& spec);

/// Field-level description of one parameter, for the published schema doc.
struct ParamSpec {
  std::string name;
  std::string kind;  // string | number | int | bool | string_list | string_map | object | expr | value
  bool required = false;
  nlohmann::json default_value;  // null when there is no default
  std::vector<std::string> one_of;  // enumerated values, when constrained
};

const std::vector<ParamSpec>& param_schema(Preparator p);

/// Machine-readable schema of the pipeline file format (JSON Schema).
nlohmann::json pipeline_file_schema();

}  // namespace prepbench
