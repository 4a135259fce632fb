#include "prepbench/taxonomy.hpp"

#include <algorithm>
#include <fstream>

#include "prepbench/errors.hpp"
#include "prepbench/expr.hpp"

namespace prepbench {

const char* to_string(Stage s) {
  switch (s) {
    case Stage::IO: return "IO";
    case Stage::EDA: return "EDA";
    case Stage::DT: return "DT";
    case Stage::DC: return "DC";
  }
  return "?";
}

std::optional<Stage> stage_from_string(const std::string& s) {
  if (s == "IO") return Stage::IO;
  if (s == "EDA") return Stage::EDA;
  if (s == "DT") return Stage::DT;
  if (s == "DC") return Stage::DC;
  return std::nullopt;
}

const std::array<Preparator, kPreparatorCount>& all_preparators() {
  static const std::array<Preparator, kPreparatorCount> all = {
      Preparator::Read,    Preparator::Write,   Preparator::IsNa,   Preparator::Outlier,
      Preparator::SrchPtn, Preparator::Sort,    Preparator::GetCols, Preparator::DTypes,
      Preparator::Stats,   Preparator::Query,   Preparator::Cast,   Preparator::Drop,
      Preparator::Rename,  Preparator::Pivot,   Preparator::CalcCol, Preparator::Join,
      Preparator::OneHot,  Preparator::CatEnc,  Preparator::Group,  Preparator::ChDate,
      Preparator::DropNa,  Preparator::SetCase, Preparator::Norm,   Preparator::Dedup,
      Preparator::FillNa,  Preparator::Replace, Preparator::Edit,
  };
  return all;
}

const char* to_string(Preparator p) {
  switch (p) {
    case Preparator::Read: return "read";
    case Preparator::Write: return "write";
    case Preparator::IsNa: return "isna";
    case Preparator::Outlier: return "outlier";
    case Preparator::SrchPtn: return "srchptn";
    case Preparator::Sort: return "sort";
    case Preparator::GetCols: return "getcols";
    case Preparator::DTypes: return "dtypes";
    case Preparator::Stats: return "stats";
    case Preparator::Query: return "query";
    case Preparator::Cast: return "cast";
    case Preparator::Drop: return "drop";
    case Preparator::Rename: return "rename";
    case Preparator::Pivot: return "pivot";
    case Preparator::CalcCol: return "calccol";
    case Preparator::Join: return "join";
    case Preparator::OneHot: return "onehot";
    case Preparator::CatEnc: return "catenc";
    case Preparator::Group: return "group";
    case Preparator::ChDate: return "chdate";
    case Preparator::DropNa: return "dropna";
    case Preparator::SetCase: return "setcase";
    case Preparator::Norm: return "norm";
    case Preparator::Dedup: return "dedup";
    case Preparator::FillNa: return "fillna";
    case Preparator::Replace: return "replace";
    case Preparator::Edit: return "edit";
  }
  return "?";
}

std::optional<Preparator> preparator_from_string(const std::string& name) {
  for (const Preparator p : all_preparators())
    if (name == to_string(p)) return p;
  return std::nullopt;
}

Stage stage_of(Preparator p) {
  switch (p) {
    case Preparator::Read:
    case Preparator::Write: return Stage::IO;
    case Preparator::IsNa:
    case Preparator::Outlier:
    case Preparator::SrchPtn:
    case Preparator::Sort:
    case Preparator::GetCols:
    case Preparator::DTypes:
    case Preparator::Stats:
    case Preparator::Query: return Stage::EDA;
    case Preparator::Cast:
    case Preparator::Drop:
    case Preparator::Rename:
    case Preparator::Pivot:
    case Preparator::CalcCol:
    case Preparator::Join:
    case Preparator::OneHot:
    case Preparator::CatEnc:
    case Preparator::Group: return Stage::DT;
    case Preparator::ChDate:
    case Preparator::DropNa:
    case Preparator::SetCase:
    case Preparator::Norm:
    case Preparator::Dedup:
    case Preparator::FillNa:
    case Preparator::Replace:
    case Preparator::Edit: return Stage::DC;
  }
  return Stage::IO;
}

std::vector<Preparator> preparators_of(Stage s) {
  std::vector<Preparator> out;
  for (const Preparator p : all_preparators())
    if (stage_of(p) == s) out.push_back(p);
  return out;
}

const char* to_string(CompatibilityLevel c) {
  switch (c) {
    case CompatibilityLevel::FullMatch: return "FULL_MATCH";
    case CompatibilityLevel::DifferentInterface: return "DIFFERENT_INTERFACE";
    case CompatibilityLevel::CustomImplemented: return "CUSTOM_IMPLEMENTED";
  }
  return "?";
}

namespace {

ParamSpec req(const char* name, const char* kind) { return {name, kind, true, nullptr, {}}; }

ParamSpec opt(const char* name, const char* kind, nlohmann::json def = nullptr) {
  return {name, kind, false, std::move(def), {}};
}

ParamSpec choice(const char* name, bool required, std::vector<std::string> values,
                 nlohmann::json def = nullptr) {
  ParamSpec p{name, "string", required, std::move(def), std::move(values)};
  return p;
}

const std::map<Preparator, std::vector<ParamSpec>>& schema_table() {
  static const std::map<Preparator, std::vector<ParamSpec>> table = {
      {Preparator::Read,
       {opt("path", "string"), choice("format", false, {"csv", "parquet"})}},
      {Preparator::Write,
       {req("path", "string"), choice("format", false, {"csv", "parquet"}, "csv")}},
      {Preparator::IsNa, {opt("columns", "string_list")}},
      {Preparator::Outlier,
       {req("column", "string"), opt("lower_quantile", "number", 0.25),
        opt("upper_quantile", "number", 0.75), opt("iqr_multiplier", "number", 1.5)}},
      {Preparator::SrchPtn,
       {req("column", "string"), req("pattern", "string"), opt("regex", "bool", false)}},
      {Preparator::Sort, {req("by", "string_list"), opt("ascending", "bool_or_list", true)}},
      {Preparator::GetCols, {}},
      {Preparator::DTypes, {}},
      {Preparator::Stats, {opt("columns", "string_list")}},
      {Preparator::Query, {req("expr", "expr")}},
      {Preparator::Cast, {req("columns", "string_map"), opt("format", "string")}},
      {Preparator::Drop, {req("columns", "string_list")}},
      {Preparator::Rename, {req("columns", "string_map")}},
      {Preparator::Pivot,
       {req("index", "string"), req("columns", "string"), req("values", "string"),
        choice("agg", false, {"sum", "mean", "count", "min", "max"}, "mean")}},
      {Preparator::CalcCol, {req("column", "string"), req("expr", "expr")}},
      {Preparator::Join,
       {req("other", "string"), choice("how", false, {"inner", "left", "right", "outer"}, "inner"),
        opt("on", "string_list"), opt("left_on", "string_list"), opt("right_on", "string_list"),
        opt("suffix", "string", "_r")}},
      {Preparator::OneHot, {req("columns", "string_list")}},
      {Preparator::CatEnc, {req("columns", "string_list")}},
      {Preparator::Group, {req("by", "string_list"), req("aggs", "object")}},
      {Preparator::ChDate,
       {req("column", "string"), opt("from_format", "string"), opt("to_format", "string")}},
      {Preparator::DropNa,
       {opt("columns", "string_list"), choice("how", false, {"any", "all"}, "any")}},
      {Preparator::SetCase,
       {req("columns", "string_list"), choice("mode", true, {"upper", "lower", "title"})}},
      {Preparator::Norm, {req("column", "string"), choice("method", false, {"minmax"}, "minmax")}},
      {Preparator::Dedup,
       {opt("columns", "string_list"), choice("keep", false, {"first"}, "first")}},
      {Preparator::FillNa,
       {opt("columns", "string_list"),
        choice("strategy", true, {"constant", "mean", "median", "mode", "forward"}),
        opt("value", "value")}},
      {Preparator::Replace,
       {opt("columns", "string_list"), req("old", "value"), req("new", "value")}},
      {Preparator::Edit, {req("row", "int"), req("column", "string"), req("value", "value")}},
  };
  return table;
}

bool kind_matches(const std::string& kind, const nlohmann::json& v) {
  if (kind == "string" || kind == "expr") return v.is_string();
  if (kind == "number") return v.is_number();
  if (kind == "int") return v.is_number_integer();
  if (kind == "bool") return v.is_boolean();
  if (kind == "bool_or_list") {
    if (v.is_boolean()) return true;
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!e.is_boolean()) return false;
    return true;
  }
  if (kind == "string_list") {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!e.is_string()) return false;
    return true;
  }
  if (kind == "string_map") {
    if (!v.is_object()) return false;
    for (const auto& [k, e] : v.items())
      if (!e.is_string()) return false;
    return true;
  }
  if (kind == "object") return v.is_object();
  if (kind == "value") return v.is_primitive();
  return false;
}

void validate_group_aggs(const nlohmann::json& aggs, const std::string& label) {
  static const std::vector<std::string> fns = {"sum", "mean", "count", "min", "max", "nunique"};
  if (aggs.empty()) throw ValidationError(label + ": group needs at least one aggregation");
  for (const auto& [out, spec] : aggs.items()) {
    if (!spec.is_object() || !spec.contains("col") || !spec.contains("fn") ||
        !spec["col"].is_string() || !spec["fn"].is_string())
      throw ValidationError(label + ": agg '" + out + "' must be {\"col\": ..., \"fn\": ...}");
    const std::string fn = spec["fn"].get<std::string>();
    if (std::find(fns.begin(), fns.end(), fn) == fns.end())
      throw ValidationError(label + ": unknown aggregation function '" + fn + "'");
  }
}

}  // namespace

const std::vector<ParamSpec>& param_schema(Preparator p) { return schema_table().at(p); }

PreparatorCall validate_call(const PreparatorCall& call, const std::string& step_label) {
  const std::string label = step_label.empty() ? to_string(call.op) : step_label;
  const auto& params = param_schema(call.op);
  if (!call.args.is_object()) throw ValidationError(label + ": args must be an object");

  PreparatorCall out = call;
  for (const auto& [key, v] : call.args.items()) {
    const auto it = std::find_if(params.begin(), params.end(),
                                 [&](const ParamSpec& p) { return p.name == key; });
    if (it == params.end())
      throw ValidationError(label + ": unknown argument '" + key + "' for " + to_string(call.op));
    if (!kind_matches(it->kind, v))
      throw ValidationError(label + ": argument '" + key + "' must be a " + it->kind);
    if (!it->one_of.empty()) {
      const std::string s = v.get<std::string>();
      if (std::find(it->one_of.begin(), it->one_of.end(), s) == it->one_of.end())
        throw ValidationError(label + ": argument '" + key + "' must be one of the documented values, got '" + s + "'");
    }
    if (it->kind == "expr") {
      try {
        expr::parse(v.get<std::string>());
      } catch (const ParseError& e) {
        throw ValidationError(label + ": bad expression in '" + key + "': " + e.what());
      }
    }
  }
  for (const auto& p : params) {
    if (!call.args.contains(p.name)) {
      if (p.required) throw ValidationError(label + ": missing required argument '" + p.name + "'");
      if (!p.default_value.is_null()) out.args[p.name] = p.default_value;
    }
  }

  if (call.op == Preparator::Group) validate_group_aggs(out.args["aggs"], label);
  if (call.op == Preparator::FillNa && out.args["strategy"] == "constant" &&
      !out.args.contains("value"))
    throw ValidationError(label + ": fillna with strategy 'constant' requires 'value'");
  if (call.op == Preparator::Join) {
    const bool has_on = out.args.contains("on");
    const bool has_lr = out.args.contains("left_on") || out.args.contains("right_on");
    if (has_on && has_lr)
      throw ValidationError(label + ": join takes either 'on' or 'left_on'/'right_on'");
    if (out.args.contains("left_on") != out.args.contains("right_on"))
      throw ValidationError(label + ": join needs both 'left_on' and 'right_on'");
    if (has_lr && out.args["left_on"].size() != out.args["right_on"].size())
      throw ValidationError(label + ": 'left_on' and 'right_on' must have equal length");
  }
  if (call.op == Preparator::Edit && out.args["row"].get<std::int64_t>() < 0)
    throw ValidationError(label + ": edit row index must be >= 0");
  if (call.op == Preparator::Outlier) {
    const double lo = out.args["lower_quantile"].get<double>();
    const double hi = out.args["upper_quantile"].get<double>();
    if (!(lo >= 0.0 && lo <= 1.0 && hi >= 0.0 && hi <= 1.0 && lo <= hi))
      throw ValidationError(label + ": outlier quantiles must satisfy 0 <= lower <= upper <= 1");
  }
  return out;
}

PipelineSpec validate_pipeline(const PipelineSpec& spec) {
  if (spec.steps.empty()) throw ValidationError("pipeline '" + spec.name + "' has no steps");
  PipelineSpec out = spec;
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    const auto& step = spec.steps[i];
    const std::string label = "step " + std::to_string(i) + " (" + to_string(step.op) + ")";
    if (step.op == Preparator::Read && i != 0)
      throw ValidationError(label + ": read may only appear as the first step");
    if (step.op == Preparator::Write && i != spec.steps.size() - 1)
      throw ValidationError(label + ": write may only appear as the last step");
    out.steps[i] = validate_call(step, label);
  }
  return out;
}

PipelineSpec parse_pipeline(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("pipeline document must be an object");
  for (const char* field : {"name", "dataset", "steps"})
    if (!doc.contains(field))
      throw ValidationError(std::string("pipeline is missing required field '") + field + "'");

  PipelineSpec spec;
  if (!doc["name"].is_string()) throw ValidationError("'name' must be a string");
  spec.name = doc["name"].get<std::string>();

  const auto& ds = doc["dataset"];
  if (!ds.is_object() || !ds.contains("path") || !ds["path"].is_string())
    throw ValidationError("'dataset' must be an object with a 'path'");
  spec.dataset.path = ds["path"].get<std::string>();
  spec.dataset.format = ds.value("format", "csv");
  if (spec.dataset.format != "csv" && spec.dataset.format != "parquet")
    throw ValidationError("dataset format must be 'csv' or 'parquet', got '" +
                          spec.dataset.format + "'");

  if (!doc["steps"].is_array()) throw ValidationError("'steps' must be an array");
  std::size_t i = 0;
  for (const auto& s : doc["steps"]) {
    const std::string label = "step " + std::to_string(i);
    if (!s.is_object() || !s.contains("op") || !s["op"].is_string())
      throw ValidationError(label + ": each step must be an object with an 'op'");
    const std::string op_name = s["op"].get<std::string>();
    const auto op = preparator_from_string(op_name);
    if (!op) throw ValidationError(label + ": unknown preparator '" + op_name + "'");
    PreparatorCall call;
    call.op = *op;
    call.args = s.value("args", nlohmann::json::object());
    spec.steps.push_back(std::move(call));
    ++i;
  }
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) throw ValidationError("'metadata' must be an object");
    spec.metadata = doc["metadata"];
  }
  return validate_pipeline(spec);
}

PipelineSpec load_pipeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open pipeline file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed pipeline file " + path.string() + ": " + e.what());
  }
  return parse_pipeline(doc);
}

nlohmann::json serialize_pipeline(const PipelineSpec& spec) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : spec.steps) {
    nlohmann::json step{{"op", to_string(s.op)}};
    if (!s.args.empty()) step["args"] = s.args;
    steps.push_back(std::move(step));
  }
  nlohmann::json doc{
      {"name", spec.name},
      {"dataset", {{"path", spec.dataset.path}, {"format", spec.dataset.format}}},
      {"steps", std::move(steps)},
  };
  if (!spec.metadata.empty()) doc["metadata"] = spec.metadata;
  return doc;
}

nlohmann::json pipeline_file_schema() {
  nlohmann::json step_variants = nlohmann::json::array();
  for (const Preparator p : all_preparators()) {
    nlohmann::json props = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& param : param_schema(p)) {
      nlohmann::json prop;
      if (param.kind == "string" || param.kind == "expr") prop["type"] = "string";
      else if (param.kind == "number") prop["type"] = "number";
      else if (param.kind == "int") prop["type"] = "integer";
      else if (param.kind == "bool") prop["type"] = "boolean";
      else if (param.kind == "string_list")
        prop = {{"type", "array"}, {"items", {{"type", "string"}}}};
      else if (param.kind == "bool_or_list")
        prop = {{"oneOf", {{{"type", "boolean"}},
                           {{"type", "array"}, {"items", {{"type", "boolean"}}}}}}};
      else if (param.kind == "string_map")
        prop = {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}};
      else if (param.kind == "object") prop["type"] = "object";
      else prop = {{"type", {"string", "number", "boolean", "null"}}};
      if (!param.one_of.empty()) prop["enum"] = param.one_of;
      if (!param.default_value.is_null()) prop["default"] = param.default_value;
      props[param.name] = std::move(prop);
      if (param.required) required.push_back(param.name);
    }
    nlohmann::json variant{
        {"properties",
         {{"op", {{"const", to_string(p)}}},
          {"args", {{"type", "object"}, {"properties", std::move(props)},
                    {"additionalProperties", false}}}}},
    };
    if (!required.empty()) variant["properties"]["args"]["required"] = std::move(required);
    step_variants.push_back(std::move(variant));
  }

  return nlohmann::json{
      {"$schema", "http://json-schema.org/draft-07/schema#"},
      {"title", "prepbench pipeline"},
      {"type", "object"},
      {"required", {"name", "dataset", "steps"}},
      {"additionalProperties", false},
      {"properties",
       {{"name", {{"type", "string"}}},
        {"dataset",
         {{"type", "object"},
          {"required", {"path"}},
          {"properties",
           {{"path", {{"type", "string"}}},
            {"format", {{"enum", {"csv", "parquet"}}, {"default", "csv"}}}}}}},
        {"steps",
         {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "object"},
            {"required", {"op"}},
            {"oneOf", std::move(step_variants)}}}}},
        {"metadata", {{"type", "object"}}}}},
  };
}

}  // namespace prepbench
