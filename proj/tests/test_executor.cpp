#include <doctest.h>

#include <fstream>

#include "prepbench/csv.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/executor.hpp"
#include "support/test_adapters.hpp"

using namespace prepbench;

namespace {

PreparatorCall call(Preparator op, const nlohmann::json& args = nlohmann::json::object()) {
  return validate_call({op, args});
}

/// Writes the standard fixture and returns a pipeline bound to it.
PipelineSpec fixture_pipeline(const std::filesystem::path& dir,
                              std::vector<PreparatorCall> steps, const std::string& name) {
  const Table t = standard_fixture(120);
  write_csv(t, dir / "data.csv");
  PipelineSpec spec;
  spec.name = name;
  spec.dataset = {(dir / "data.csv").string(), "csv"};
  spec.steps = std::move(steps);
  return spec;
}

}  // namespace

TEST_CASE("function-core emits one record per step per run; lazy materializes each step") {
  const auto dir = testing::scratch_dir("exec-core");
  const PipelineSpec spec = fixture_pipeline(
      dir,
      {call(Preparator::Read), call(Preparator::DropNa, {{"columns", {"qty"}}}),
       call(Preparator::FillNa, {{"columns", {"price"}}, {"strategy", "mean"}})},
      "three-step");

  testing::InstrumentedAdapter adapter(make_lazy_adapter());
  RunPlan plan{1, 2, 600};
  const auto records = run(adapter, spec, Mode::FunctionCore, plan);
  REQUIRE(records.size() == 6);  // 3 targets x 2 measured runs
  for (const auto& r : records) {
    CHECK(r.status == RunStatus::OK);
    CHECK(r.wall_time.has_value());
    CHECK(*r.wall_time > 0.0);
  }
  CHECK(records[0].target == "read");
  CHECK(records[1].target == "dropna");
  CHECK(records[2].target == "fillna");
  // One materialize per step: 6 measured (+ 3 for the warm-up run).
  CHECK(adapter.materialize_calls == 9);
}

TEST_CASE("mode semantics: materialize counts 5 / 2 / 1 on a 5-step 2-stage pipeline") {
  const auto dir = testing::scratch_dir("exec-modes");
  const PipelineSpec spec = fixture_pipeline(
      dir,
      {call(Preparator::Read),
       call(Preparator::DropNa, {{"columns", {"qty"}}}),
       call(Preparator::SetCase, {{"columns", {"cat"}}, {"mode", "lower"}}),
       call(Preparator::Dedup, {{"columns", {"cat", "flag"}}}),
       call(Preparator::FillNa, {{"columns", {"price"}}, {"strategy", "mean"}})},
      "five-step");
  RunPlan plan{0, 1, 600};

  const auto expect_counts = [&](Mode mode, int expected_materialize, std::size_t expected_records) {
    testing::InstrumentedAdapter adapter(make_lazy_adapter());
    const auto records = run(adapter, spec, mode, plan);
    CHECK(records.size() == expected_records);
    CHECK(adapter.materialize_calls == expected_materialize);
  };
  expect_counts(Mode::FunctionCore, 5, 5);
  expect_counts(Mode::PipelineStage, 2, 2);  // IO stage, DC stage
  expect_counts(Mode::PipelineFull, 1, 1);

  // Stage targets carry stage names; full mode targets FULL.
  testing::InstrumentedAdapter adapter(make_lazy_adapter());
  const auto stage_records = run(adapter, spec, Mode::PipelineStage, plan);
  CHECK(stage_records[0].target == "IO");
  CHECK(stage_records[1].target == "DC");
  const auto full_records = run(adapter, spec, Mode::PipelineFull, plan);
  CHECK(full_records[0].target == "FULL");
}

TEST_CASE("eager engines produce identical final tables across modes") {
  const auto dir = testing::scratch_dir("exec-eager");
  register_builtin_adapters();
  std::map<Mode, Table> finals;
  for (const Mode mode : {Mode::FunctionCore, Mode::PipelineStage, Mode::PipelineFull}) {
    const std::string out = "out_" + std::string(to_string(mode)) + ".csv";
    const PipelineSpec spec = fixture_pipeline(
        dir,
        {call(Preparator::Read),
         call(Preparator::Query, {{"expr", "qty > 3"}}),
         call(Preparator::Sort, {{"by", {"id"}}}),
         call(Preparator::Norm, {{"column", "price"}}),
         call(Preparator::Write, {{"path", (dir / out).string()}, {"format", "csv"}})},
        "modes");
    auto adapter = make_columnar_adapter();
    const auto records = run(*adapter, spec, mode, RunPlan{0, 1, 600});
    for (const auto& r : records) CHECK(r.status == RunStatus::OK);
    finals[mode] = read_csv(dir / out);
  }
  CHECK(compare_tables(finals[Mode::FunctionCore], finals[Mode::PipelineStage],
                       {.ordered = true, .rel_tol = 0.0})
            .equal);
  CHECK(compare_tables(finals[Mode::FunctionCore], finals[Mode::PipelineFull],
                       {.ordered = true, .rel_tol = 0.0})
            .equal);
}

TEST_CASE("unsupported steps skip the rest of the run but keep the record count") {
  const auto dir = testing::scratch_dir("exec-unsupported");
  const PipelineSpec spec = fixture_pipeline(
      dir,
      {call(Preparator::Read), call(Preparator::Dedup),
       call(Preparator::FillNa, {{"strategy", "forward"}})},
      "gap");
  testing::InstrumentedAdapter adapter(make_columnar_adapter());
  adapter.unsupported.insert(Preparator::Dedup);
  const auto records = run(adapter, spec, Mode::FunctionCore, RunPlan{0, 2, 600});
  REQUIRE(records.size() == 6);  // record count invariant, statuses regardless
  for (int run_idx = 0; run_idx < 2; ++run_idx) {
    CHECK(records[run_idx * 3 + 0].status == RunStatus::OK);
    CHECK(records[run_idx * 3 + 1].status == RunStatus::UNSUPPORTED);
    CHECK(records[run_idx * 3 + 2].status == RunStatus::UNSUPPORTED);  // skipped, cause carried
    CHECK_FALSE(records[run_idx * 3 + 1].wall_time.has_value());
  }
}

TEST_CASE("warm-up runs never contribute records or metrics") {
  const auto dir = testing::scratch_dir("exec-warmup");
  const PipelineSpec spec =
      fixture_pipeline(dir, {call(Preparator::Read), call(Preparator::Dedup)}, "warm");
  testing::InstrumentedAdapter adapter(make_columnar_adapter());
  const auto records = run(adapter, spec, Mode::PipelineFull, RunPlan{3, 2, 600});
  CHECK(records.size() == 2);  // measured only
  for (const auto& r : records) CHECK(r.run_index < 2);
}

TEST_CASE("records persist incrementally under the fixed layout") {
  const auto dir = testing::scratch_dir("exec-persist");
  const PipelineSpec spec =
      fixture_pipeline(dir, {call(Preparator::Read), call(Preparator::Dedup)}, "persisted");
  auto adapter = make_columnar_adapter();
  RunOptions options;
  options.results_root = dir / "results";
  const auto records = run(*adapter, spec, Mode::FunctionCore, RunPlan{0, 2, 600}, options);

  const auto file = results_dir(options.results_root, "columnar", "persisted", Mode::FunctionCore) /
                    "records.jsonl";
  REQUIRE(std::filesystem::exists(file));
  const auto loaded = load_records(options.results_root);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].engine == records[i].engine);
    CHECK(loaded[i].target == records[i].target);
    CHECK(loaded[i].status == records[i].status);
    CHECK(loaded[i].run_index == records[i].run_index);
  }
  // Wire schema: exact field names.
  std::ifstream in(file);
  std::string line;
  std::getline(in, line);
  const auto j = nlohmann::json::parse(line);
  for (const char* field : {"engine", "pipeline", "target", "mode", "run_index", "wall_time",
                            "status"})
    CHECK(j.contains(field));
}

TEST_CASE("failure classification") {
  CHECK(classify_failure(EngineError("boom", true)) == RunStatus::OOM);
  CHECK(classify_failure(EngineError("boom")) == RunStatus::ERROR);
  CHECK(classify_failure(UnsupportedOperation("nope")) == RunStatus::UNSUPPORTED);
  CHECK(classify_failure(std::bad_alloc()) == RunStatus::OOM);
  CHECK(classify_failure(std::runtime_error("column not found")) == RunStatus::ERROR);

  CHECK(classify_exit(0, 0, false) == RunStatus::OK);
  CHECK(classify_exit(kOomExitCode, 0, false) == RunStatus::OOM);
  CHECK(classify_exit(0, 9, false) == RunStatus::OOM);  // memory-kill
  CHECK(classify_exit(1, 0, false) == RunStatus::ERROR);
  CHECK(classify_exit(0, 0, true) == RunStatus::TIMEOUT);
}

TEST_CASE("two consecutive OOMs abort the remaining repetitions of that target") {
  const auto dir = testing::scratch_dir("exec-oom");
  const PipelineSpec spec =
      fixture_pipeline(dir, {call(Preparator::Read), call(Preparator::Dedup)}, "oomy");
  testing::InstrumentedAdapter adapter(make_columnar_adapter());
  adapter.oom_on.insert(Preparator::Dedup);
  const auto records = run(adapter, spec, Mode::FunctionCore, RunPlan{0, 5, 600});
  REQUIRE(records.size() == 10);
  int oom_records = 0;
  for (const auto& r : records)
    if (r.target == "dedup") {
      CHECK(r.status == RunStatus::OOM);
      ++oom_records;
    }
  CHECK(oom_records == 5);
  // Applies stop after the second OOM: 5 reads + 2 executed dedup attempts.
  CHECK(adapter.apply_calls == 5 + 2);
}

TEST_CASE("timing spans include lazy materialization") {
  // A lazy adapter that defers everything would otherwise report near-zero
  // step times; the span must cover the forced execution.
  const auto dir = testing::scratch_dir("exec-span");
  const PipelineSpec spec = fixture_pipeline(
      dir, {call(Preparator::Read), call(Preparator::Sort, {{"by", {"price"}}})}, "span");
  auto lazy = make_lazy_adapter();
  const auto records = run(*lazy, spec, Mode::FunctionCore, RunPlan{0, 1, 600});
  REQUIRE(records.size() == 2);
  // The sort of 120 rows is cheap but not free; materialization must have
  // happened inside the measured span for a nonzero, sane wall time.
  CHECK(*records[1].wall_time > 0.0);
  CHECK(*records[1].wall_time < 10.0);
}
