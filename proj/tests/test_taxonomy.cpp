#include <doctest.h>

#include <fstream>
#include <set>

#include "prepbench/adapter.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/taxonomy.hpp"
#include "support/test_adapters.hpp"

using namespace prepbench;

TEST_CASE("vocabulary partitions into the four stages") {
  CHECK(all_preparators().size() == 27);
  std::map<Stage, std::set<std::string>> members;
  std::set<std::string> names;
  for (const Preparator p : all_preparators()) {
    CHECK(names.insert(to_string(p)).second);  // unique
    members[stage_of(p)].insert(to_string(p));
    const std::string name = to_string(p);
    CHECK(name == std::string(name));
    for (const char c : name) CHECK_FALSE(std::isupper(static_cast<unsigned char>(c)));
  }
  CHECK(members[Stage::IO].size() == 2);
  CHECK(members[Stage::EDA].size() == 8);
  CHECK(members[Stage::DT].size() == 9);
  CHECK(members[Stage::DC].size() == 8);
  std::size_t total = 0;
  for (const auto& [stage, set] : members) total += set.size();
  CHECK(total == 27);  // pairwise disjoint since names are unique
}

TEST_CASE("stage assignments match the canonical grouping") {
  CHECK(stage_of(Preparator::Dedup) == Stage::DC);
  CHECK(stage_of(Preparator::Pivot) == Stage::DT);
  CHECK(stage_of(Preparator::IsNa) == Stage::EDA);
  CHECK(stage_of(Preparator::Read) == Stage::IO);
  CHECK(stage_of(Preparator::Query) == Stage::EDA);
  CHECK(stage_of(Preparator::Group) == Stage::DT);
  CHECK(stage_of(Preparator::ChDate) == Stage::DC);
}

TEST_CASE("round trip through preparator names") {
  for (const Preparator p : all_preparators())
    CHECK(preparator_from_string(to_string(p)) == p);
  CHECK_FALSE(preparator_from_string("dropnulls").has_value());
}

namespace {

nlohmann::json minimal_pipeline() {
  return nlohmann::json{
      {"name", "mini"},
      {"dataset", {{"path", "data.csv"}, {"format", "csv"}}},
      {"steps",
       {{{"op", "read"}},
        {{"op", "dropna"}},
        {{"op", "write"}, {"args", {{"path", "out.csv"}}}}}},
  };
}

}  // namespace

TEST_CASE("minimal valid pipeline parses with stage sequence IO/DC/IO") {
  const PipelineSpec spec = parse_pipeline(minimal_pipeline());
  REQUIRE(spec.steps.size() == 3);
  CHECK(stage_of(spec.steps[0].op) == Stage::IO);
  CHECK(stage_of(spec.steps[1].op) == Stage::DC);
  CHECK(stage_of(spec.steps[2].op) == Stage::IO);
  CHECK(spec.steps[2].args["format"] == "csv");  // default injected
}

TEST_CASE("unknown preparator is rejected naming the offending step") {
  auto doc = minimal_pipeline();
  doc["steps"][1]["op"] = "dropnulls";
  try {
    parse_pipeline(doc);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dropnulls") != std::string::npos);
    CHECK(msg.find("step 1") != std::string::npos);
  }
}

TEST_CASE("a 27-step pipeline covers the whole vocabulary") {
  nlohmann::json steps = nlohmann::json::array();
  steps.push_back({{"op", "read"}});
  for (const Preparator p : all_preparators()) {
    if (p == Preparator::Read || p == Preparator::Write) continue;
    nlohmann::json args = nlohmann::json::object();
    switch (p) {
      case Preparator::Outlier: args = {{"column", "x"}}; break;
      case Preparator::SrchPtn: args = {{"column", "s"}, {"pattern", "a"}}; break;
      case Preparator::Sort: args = {{"by", {"x"}}}; break;
      case Preparator::Query: args = {{"expr", "x > 0"}}; break;
      case Preparator::Cast: args = {{"columns", {{"x", "float"}}}}; break;
      case Preparator::Drop: args = {{"columns", {"s"}}}; break;
      case Preparator::Rename: args = {{"columns", {{"x", "y"}}}}; break;
      case Preparator::Pivot:
        args = {{"index", "a"}, {"columns", "b"}, {"values", "x"}, {"agg", "sum"}};
        break;
      case Preparator::CalcCol: args = {{"column", "z"}, {"expr", "x + 1"}}; break;
      case Preparator::Join: args = {{"other", "lookup"}, {"on", {"k"}}}; break;
      case Preparator::OneHot:
      case Preparator::CatEnc:
      case Preparator::SetCase: args = {{"columns", {"s"}}}; break;
      case Preparator::Group:
        args = {{"by", {"a"}}, {"aggs", {{"n", {{"col", "x"}, {"fn", "count"}}}}}};
        break;
      case Preparator::ChDate: args = {{"column", "d"}, {"from_format", "%Y-%m-%d"}}; break;
      case Preparator::Norm: args = {{"column", "x"}}; break;
      case Preparator::FillNa: args = {{"strategy", "forward"}}; break;
      case Preparator::Replace: args = {{"old", 0}, {"new", 1}}; break;
      case Preparator::Edit: args = {{"row", 0}, {"column", "x"}, {"value", 5}}; break;
      default: break;
    }
    if (p == Preparator::SetCase) args["mode"] = "upper";
    nlohmann::json step{{"op", to_string(p)}};
    if (!args.empty()) step["args"] = args;
    steps.push_back(std::move(step));
  }
  steps.push_back({{"op", "write"}, {"args", {{"path", "out.csv"}}}});

  nlohmann::json doc{{"name", "all"},
                     {"dataset", {{"path", "d.csv"}, {"format", "csv"}}},
                     {"steps", std::move(steps)}};
  const PipelineSpec spec = parse_pipeline(doc);
  CHECK(spec.steps.size() == 27);
  std::map<Stage, int> counts;
  std::set<Preparator> seen;
  for (const auto& s : spec.steps) {
    counts[stage_of(s.op)]++;
    seen.insert(s.op);
  }
  CHECK(seen.size() == 27);
  CHECK(counts[Stage::IO] == 2);
  CHECK(counts[Stage::EDA] == 8);
  CHECK(counts[Stage::DT] == 9);
  CHECK(counts[Stage::DC] == 8);
}

TEST_CASE("step order rules: read first, write last") {
  auto doc = minimal_pipeline();
  doc["steps"] = {{{"op", "dropna"}}, {{"op", "read"}}};
  CHECK_THROWS_AS(parse_pipeline(doc), ValidationError);
  doc = minimal_pipeline();
  doc["steps"] = {{{"op", "write"}, {"args", {{"path", "o.csv"}}}}, {{"op", "dropna"}}};
  CHECK_THROWS_AS(parse_pipeline(doc), ValidationError);
  doc = minimal_pipeline();
  doc["steps"] = nlohmann::json::array();
  CHECK_THROWS_AS(parse_pipeline(doc), ValidationError);
}

TEST_CASE("argument schemas reject unknown and ill-typed arguments") {
  CHECK_THROWS_AS(validate_call({Preparator::Dedup, {{"keap", "first"}}}), ValidationError);
  CHECK_THROWS_AS(validate_call({Preparator::Sort, {{"by", "x"}}}), ValidationError);  // not a list
  CHECK_THROWS_AS(validate_call({Preparator::FillNa, {{"strategy", "zeros"}}}), ValidationError);
  CHECK_THROWS_AS(validate_call({Preparator::FillNa, {{"strategy", "constant"}}}),
                  ValidationError);  // constant requires value
  CHECK_THROWS_AS(validate_call({Preparator::Query, {{"expr", "x >"}}}), ValidationError);
  CHECK_THROWS_AS(validate_call({Preparator::Outlier,
                                 {{"column", "x"}, {"lower_quantile", 0.9}, {"upper_quantile", 0.2}}}),
                  ValidationError);
  // Defaults are filled in.
  const auto call = validate_call({Preparator::Outlier, {{"column", "x"}}});
  CHECK(call.args["lower_quantile"] == 0.25);
  CHECK(call.args["upper_quantile"] == 0.75);
  CHECK(call.args["iqr_multiplier"] == 1.5);
}

TEST_CASE("serialize then load is the identity on valid pipelines") {
  const auto docs = {minimal_pipeline()};
  for (const auto& doc : docs) {
    const PipelineSpec spec = parse_pipeline(doc);
    const PipelineSpec again = parse_pipeline(serialize_pipeline(spec));
    CHECK(spec == again);
  }
  // A richer spec with metadata and args.
  nlohmann::json doc = minimal_pipeline();
  doc["metadata"] = {{"source", "unit"}};
  doc["steps"][1] = {{"op", "fillna"}, {"args", {{"strategy", "constant"}, {"value", 3}}}};
  const PipelineSpec spec = parse_pipeline(doc);
  CHECK(parse_pipeline(serialize_pipeline(spec)) == spec);
}

TEST_CASE("compatibility declarations pass through the registry") {
  AdapterRegistry registry;  // local instance, not the process-wide one
  registry.register_adapter(reference_descriptor(), make_reference_adapter);

  AdapterDescriptor custom = columnar_descriptor();
  custom.engine.name = "declared-gaps";
  custom.supports[Preparator::Dedup] = CompatibilityLevel::CustomImplemented;
  custom.supports[Preparator::Pivot] = CompatibilityLevel::DifferentInterface;
  registry.register_adapter(custom, make_columnar_adapter);

  for (const Preparator p : all_preparators())
    CHECK(registry.compatibility("reference", p) == CompatibilityLevel::FullMatch);
  CHECK(registry.compatibility("declared-gaps", Preparator::Dedup) ==
        CompatibilityLevel::CustomImplemented);

  // Matrix export: 2 engines x 27 preparators, no missing cells.
  std::size_t cells = 0;
  for (const auto& engine : registry.names())
    for (const Preparator p : all_preparators()) {
      (void)registry.compatibility(engine, p);
      ++cells;
    }
  CHECK(cells == 54);

  CHECK_THROWS_AS(registry.register_adapter(custom, make_columnar_adapter), DuplicateEngine);
  CHECK_THROWS_AS(registry.get("nope"), UnknownEngine);

  AdapterDescriptor incomplete = columnar_descriptor();
  incomplete.engine.name = "incomplete";
  incomplete.supports.erase(Preparator::Edit);
  CHECK_THROWS_AS(registry.register_adapter(incomplete, make_columnar_adapter), ValidationError);

  // Ordering for reporting.
  CHECK(CompatibilityLevel::FullMatch > CompatibilityLevel::DifferentInterface);
  CHECK(CompatibilityLevel::DifferentInterface > CompatibilityLevel::CustomImplemented);
}

TEST_CASE("shipped pipeline schema document matches the generator") {
  const auto repo_schema = std::filesystem::path(PREPBENCH_SOURCE_DIR) / "schemas" /
                           "pipeline.schema.json";
  REQUIRE(std::filesystem::exists(repo_schema));
  std::ifstream in(repo_schema);
  nlohmann::json shipped;
  in >> shipped;
  CHECK(shipped == pipeline_file_schema());
}

TEST_CASE("malformed pipeline files raise ParseError") {
  const auto dir = testing::scratch_dir("taxonomy");
  const auto path = dir / "broken.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_pipeline(path), ParseError);
  CHECK_THROWS_AS(load_pipeline(dir / "missing.json"), IOError);
}
