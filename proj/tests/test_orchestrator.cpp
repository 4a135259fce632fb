#include <doctest.h>

#include <fstream>

#include "prepbench/csv.hpp"
#include "prepbench/dataset.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/orchestrator.hpp"
#include "support/test_adapters.hpp"

using namespace prepbench;
using namespace prepbench::orchestrator;

namespace {

/// A fake runtime that answers from a table of (fraction-tagged pipeline,
/// preset) -> status, recording what was probed.
class ScriptedRuntime final : public ContainerRuntime {
public:
  std::function<RunStatus(const Job&)> script;
  std::vector<std::string> probes;

  bool available() const override { return true; }
  std::string name() const override { return "scripted"; }
  JobResult run(const Job& job) override {
    probes.push_back(job.config.name);
    JobResult result;
    result.status = script(job);
    if (result.status == RunStatus::OK) {
      TimingRecord r;
      r.engine = job.engine;
      r.target = "FULL";
      r.mode = Mode::PipelineFull;
      r.status = RunStatus::OK;
      r.wall_time = 1.0 + job.config.cpus;
      result.records.push_back(std::move(r));
    }
    return result;
  }
};

PipelineForFraction trivial_pipelines(const std::filesystem::path& dir) {
  return [dir](double f) {
    return dir / ("p" + std::to_string(static_cast<int>(f)) + ".json");
  };
}

}  // namespace

TEST_CASE("machine presets carry the published CPU/RAM settings") {
  const auto presets = machine_presets();
  REQUIRE(presets.size() == 3);
  CHECK(presets[0].name == "laptop");
  CHECK(presets[0].cpus == 8);
  CHECK(presets[0].ram_gb == 16);
  CHECK(presets[1].name == "workstation");
  CHECK(presets[1].cpus == 16);
  CHECK(presets[1].ram_gb == 64);
  CHECK(presets[2].name == "server");
  CHECK(presets[2].cpus == 24);
  CHECK(presets[2].ram_gb == 128);
  CHECK_THROWS_AS(preset("mainframe"), InvalidArgument);

  // Worker settings default to the CPU count (the published engine rows).
  CHECK(preset("laptop").workers_for("anything") == 8);
  MachineConfig custom = preset("laptop");
  custom.engine_workers["special"] = 4;
  CHECK(custom.workers_for("special") == 4);
  CHECK(custom.workers_for("other") == 8);
}

TEST_CASE("job specs round trip through JSON") {
  Job job;
  job.kind = "pipeline";
  job.pipeline_file = "p.json";
  job.engine = "columnar";
  job.mode = Mode::PipelineFull;
  job.plan = {2, 5, 300};
  job.config = preset("workstation");
  job.config.engine_workers["columnar"] = 16;
  job.results_root = "res";
  const Job back = Job::from_json(job.to_json());
  CHECK(back.kind == job.kind);
  CHECK(back.engine == job.engine);
  CHECK(back.plan.measured_runs == 5);
  CHECK(back.config.name == "workstation");
  CHECK(back.config.cpus == 16);
  CHECK(back.config.engine_workers.at("columnar") == 16);
}

TEST_CASE("memory hog respects an address-space ceiling") {
  // In-process sanity: a small reservation succeeds.
  memory_hog(0.05);

  // Containment: 2 GiB footprint under a 1 GiB ceiling dies as OOM, and
  // passes under 4 GiB. Scaled-down version of the published calibration.
  ProcessRuntime runtime("/proc/self/exe");
  if (!runtime.available()) {
    MESSAGE("no /proc/self/exe; process runtime checks skipped");
    return;
  }
  Job hog;
  hog.kind = "hog";
  hog.hog_gib = 2.0;
  hog.plan.timeout_seconds = 120;

  hog.config = MachineConfig{"tiny", 1, 1.0, {}};
  CHECK(runtime.run(hog).status == RunStatus::OOM);

  hog.config = MachineConfig{"roomy", 1, 4.0, {}};
  CHECK(runtime.run(hog).status == RunStatus::OK);
}

TEST_CASE("min config search stops at the first success and never probes higher") {
  const auto dir = testing::scratch_dir("minconfig");
  ScriptedRuntime runtime;
  // Succeeds everywhere: every cell is laptop and exactly one probe per
  // fraction happens.
  runtime.script = [](const Job&) { return RunStatus::OK; };
  std::vector<std::pair<double, std::string>> log;
  auto results = min_config_search("e", trivial_pipelines(dir), "ds", {1, 5, 15}, runtime,
                                   machine_presets(), &log);
  REQUIRE(results.size() == 3);
  for (const auto& r : results) {
    CHECK(r.config == "laptop");
    CHECK(r.status == RunStatus::OK);
    CHECK(r.mean_wall_time.has_value());
  }
  REQUIRE(log.size() == 3);
  for (const auto& [f, preset_name] : log) CHECK(preset_name == "laptop");

  // A synthetic engine that needs 64 GB at fraction 50 and always fails at 100.
  runtime.probes.clear();
  runtime.script = [](const Job& job) {
    const std::string stem = job.pipeline_file.stem().string();
    if (stem == "p100") return RunStatus::OOM;
    if (stem == "p50") return job.config.ram_gb >= 64 ? RunStatus::OK : RunStatus::OOM;
    return RunStatus::OK;
  };
  log.clear();
  results = min_config_search("e", trivial_pipelines(dir), "ds", {15, 50, 100}, runtime,
                              machine_presets(), &log);
  REQUIRE(results.size() == 3);
  CHECK(results[0].config == "laptop");
  CHECK(results[1].config == "workstation");
  CHECK(results[2].config == "x");  // the OOM-at-all-presets cell
  CHECK(results[2].status == RunStatus::OOM);
  // Probe order: laptop; laptop, workstation (stop, no server); all three.
  const std::vector<std::pair<double, std::string>> expected = {
      {15, "laptop"}, {50, "laptop"}, {50, "workstation"},
      {100, "laptop"}, {100, "workstation"}, {100, "server"}};
  CHECK(log == expected);
}

TEST_CASE("min config results are monotone against independent successes") {
  const auto dir = testing::scratch_dir("minconfig-mono");
  // Threshold model: job succeeds iff ram >= needed(fraction).
  const auto needed = [](double f) { return f >= 75 ? 128.0 : f >= 25 ? 64.0 : 16.0; };
  ScriptedRuntime runtime;
  runtime.script = [&](const Job& job) {
    const double f = std::stod(job.pipeline_file.stem().string().substr(1));
    return job.config.ram_gb >= needed(f) ? RunStatus::OK : RunStatus::OOM;
  };
  const auto results = min_config_search("e", trivial_pipelines(dir), "ds",
                                         {1, 25, 50, 75, 100}, runtime, machine_presets());
  for (const auto& r : results) {
    // The found preset is the smallest whose RAM clears the threshold.
    const double found = preset(r.config).ram_gb;
    CHECK(found >= needed(r.sample_fraction));
    for (const auto& p : machine_presets())
      if (p.ram_gb < found) CHECK(p.ram_gb < needed(r.sample_fraction));
  }
}

TEST_CASE("scalability sweep produces the full grid") {
  const auto dir = testing::scratch_dir("sweep-grid");
  ScriptedRuntime runtime;
  runtime.script = [](const Job&) { return RunStatus::OK; };
  const auto results = scalability_sweep({"a", "b", "c"}, trivial_pipelines(dir), "ds",
                                         {1, 5, 15, 25}, preset("laptop"), runtime);
  CHECK(results.size() == 12);  // |engines| x |fractions|

  const auto single = scalability_sweep({"a"}, trivial_pipelines(dir), "ds", {50},
                                        preset("laptop"), runtime);
  REQUIRE(single.size() == 1);
  CHECK(single[0].engine == "a");
  CHECK(single[0].sample_fraction == 50);

  const auto doc = sweep_to_json(results);
  CHECK(doc.size() == 12);
  CHECK(doc[0].contains("engine"));
  CHECK(doc[0].contains("config"));
  CHECK(doc[0].contains("status"));
}

TEST_CASE("run_contained synthesizes a classified record when the job dies silently") {
  ScriptedRuntime runtime;
  runtime.script = [](const Job&) { return RunStatus::OOM; };
  Job job;
  job.kind = "pipeline";
  job.pipeline_file = "p50.json";
  job.engine = "e";
  const auto records = run_contained(job, runtime);
  REQUIRE(records.size() == 1);
  CHECK(records[0].status == RunStatus::OOM);
}

TEST_CASE("a contained pipeline run executes end to end under limits") {
  register_builtin_adapters();
  ProcessRuntime runtime("/proc/self/exe");
  const auto dir = testing::scratch_dir("contained");
  // ProcessRuntime re-executes this binary, which is the test runner, not
  // the CLI; locate the real CLI next to us instead.
  const auto cli = std::filesystem::path(PREPBENCH_BINARY_DIR) / "tools" / "prepbench";
  if (!std::filesystem::exists(cli)) {
    MESSAGE("CLI binary not built; contained-run check skipped");
    return;
  }
  FixtureSpec fx;
  fx.rows = 200;
  fx.columns = parse_fixture_schema("a:int,b:float,c:string");
  make_fixture(fx, dir / "data.csv");
  PipelineSpec spec;
  spec.name = "contained";
  spec.dataset = {(dir / "data.csv").string(), "csv"};
  spec.steps = {validate_call({Preparator::Read, {}}),
                validate_call({Preparator::DropNa, {}})};
  std::ofstream(dir / "p.json") << serialize_pipeline(spec).dump();

  ProcessRuntime cli_runtime(cli);
  Job job;
  job.kind = "pipeline";
  job.pipeline_file = dir / "p.json";
  job.engine = "columnar";
  job.mode = Mode::PipelineFull;
  job.plan = {0, 1, 120};
  job.config = MachineConfig{"small", 1, 4.0, {}};
  job.results_root = dir / "results";
  const auto records = run_contained(job, cli_runtime);
  REQUIRE_FALSE(records.empty());
  CHECK(records[0].status == RunStatus::OK);
  CHECK(records[0].engine == "columnar");
}

TEST_CASE("docker runtime reports unavailability honestly") {
  DockerRuntime docker;
  if (docker.available()) {
    MESSAGE("docker present; skipping the unavailability check");
    return;
  }
  Job job;
  CHECK_THROWS_AS(docker.run(job), RuntimeUnavailable);
}
