#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "prepbench/adapter.hpp"
#include "prepbench/dataset.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/executor.hpp"
#include "prepbench/metrics.hpp"
#include "prepbench/orchestrator.hpp"
#include "prepbench/report.hpp"
#include "prepbench/taxonomy.hpp"
#include "prepbench/tpch.hpp"

namespace pb = prepbench;

namespace {

std::filesystem::path results_root_default() {
  if (const char* env = std::getenv("PREPBENCH_RESULTS")) return env;
  return "results";
}

pb::Adapter& engine_or_die(const std::string& name) {
  pb::register_builtin_adapters();
  auto& adapter = pb::AdapterRegistry::instance().get(name);
  if (const char* workers = std::getenv("PREPBENCH_WORKERS"))
    adapter.configure_workers(std::atoi(workers));
  return adapter;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = s.find(',', pos);
    out.push_back(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int run_job_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open job file " << path << "\n";
    return 1;
  }
  nlohmann::json doc;
  in >> doc;
  const auto job = pb::orchestrator::Job::from_json(doc);
  try {
    if (job.kind == "hog") {
      pb::orchestrator::memory_hog(job.hog_gib);
      return 0;
    }
    auto& adapter = engine_or_die(job.engine);
    adapter.configure_workers(job.config.workers_for(job.engine));
    const auto pipeline = pb::load_pipeline(job.pipeline_file);
    pb::RunOptions options;
    options.results_root = job.results_root;
    pb::run(adapter, pipeline, job.mode, job.plan, options);
    return 0;
  } catch (const std::bad_alloc&) {
    return pb::kOomExitCode;
  } catch (const pb::EngineError& e) {
    return e.is_oom() ? pb::kOomExitCode : 1;
  } catch (const std::exception& e) {
    std::cerr << "job failed: " << e.what() << "\n";
    return 1;
  }
}

/// Generates per-fraction samples and pipeline files for sweeps.
pb::orchestrator::PipelineForFraction make_fraction_pipelines(
    const std::filesystem::path& pipeline_file, const std::string& dataset,
    const std::string& format, const std::vector<double>& fractions,
    const std::filesystem::path& work_dir, std::uint64_t seed) {
  std::filesystem::create_directories(work_dir);
  const auto base = pb::load_pipeline(pipeline_file);
  auto mapping = std::make_shared<std::map<double, std::filesystem::path>>();
  for (const double f : fractions) {
    const auto sample_path =
        work_dir / ("sample_" + std::to_string(static_cast<int>(f * 100)) + "." + format);
    pb::SampleSpec spec;
    spec.fraction = f;
    spec.seed = seed;
    pb::sample(dataset, format, spec, sample_path);
    pb::PipelineSpec bound = base;
    bound.dataset.path = sample_path.string();
    bound.dataset.format = format;
    const auto pipeline_path =
        work_dir / ("pipeline_" + std::to_string(static_cast<int>(f * 100)) + ".json");
    std::ofstream out(pipeline_path);
    out << pb::serialize_pipeline(bound).dump(2) << "\n";
    (*mapping)[f] = pipeline_path;
  }
  return [mapping](double f) { return mapping->at(f); };
}

}  // namespace

int main(int argc, char** argv) {
  // Internal entry point for contained child jobs.
  if (argc >= 3 && std::string(argv[1]) == "__job") return run_job_file(argv[2]);

  CLI::App app{"prepbench: benchmark harness for data-preparation pipelines over dataframe engines"};
  app.require_subcommand(1);

  // profile
  std::string in_path, in_format = "csv";
  auto* profile_cmd = app.add_subcommand("profile", "Profile a dataset (single pass)");
  profile_cmd->add_option("--input", in_path, "dataset file")->required();
  profile_cmd->add_option("--format", in_format, "csv|parquet")
      ->check(CLI::IsMember({"csv", "parquet"}));

  // sample
  double fraction = 100.0;
  std::uint64_t seed = 42;
  std::string method = "random-uniform", out_path;
  auto* sample_cmd = app.add_subcommand("sample", "Deterministic row sample of a dataset");
  sample_cmd->add_option("--input", in_path, "dataset file")->required();
  sample_cmd->add_option("--format", in_format, "csv|parquet")
      ->check(CLI::IsMember({"csv", "parquet"}));
  sample_cmd->add_option("--fraction", fraction, "percentage in (0, 100]")->required();
  sample_cmd->add_option("--seed", seed, "sampling seed");
  sample_cmd->add_option("--method", method, "random-uniform|head")
      ->check(CLI::IsMember({"random-uniform", "head"}));
  sample_cmd->add_option("--out", out_path, "output file")->required();

  // fixture
  std::int64_t rows = 1000;
  std::string schema_spec = "id:int,value:float,label:string,flag:bool";
  double null_density = 0.0, duplicate_density = 0.0;
  std::int64_t len_min = 1, len_max = 16;
  auto* fixture_cmd = app.add_subcommand("fixture", "Generate a synthetic dataset");
  fixture_cmd->add_option("--rows", rows)->required();
  fixture_cmd->add_option("--schema", schema_spec, "name:type,... (int,float,bool,string,datetime)");
  fixture_cmd->add_option("--null-density", null_density);
  fixture_cmd->add_option("--duplicate-density", duplicate_density);
  fixture_cmd->add_option("--str-len-min", len_min);
  fixture_cmd->add_option("--str-len-max", len_max);
  fixture_cmd->add_option("--seed", seed);
  fixture_cmd->add_option("--format", in_format, "csv|parquet")
      ->check(CLI::IsMember({"csv", "parquet"}));
  fixture_cmd->add_option("--out", out_path, "output file")->required();

  // run
  std::string engine, pipeline_file, mode_name = "function-core", results_dir;
  int runs = 10, warmup = 1;
  double timeout = 1800;
  auto* run_cmd = app.add_subcommand("run", "Run a pipeline under one timing mode");
  run_cmd->add_option("--engine", engine, "engine name")->required();
  run_cmd->add_option("--pipeline", pipeline_file, "pipeline JSON file")->required();
  run_cmd->add_option("--mode", mode_name, "function-core|pipeline-stage|pipeline-full")
      ->check(CLI::IsMember({"function-core", "pipeline-stage", "pipeline-full"}));
  run_cmd->add_option("--runs", runs, "measured repetitions");
  run_cmd->add_option("--warmup", warmup, "warm-up repetitions");
  run_cmd->add_option("--timeout", timeout, "seconds per target");
  run_cmd->add_option("--results-dir", results_dir, "results root (default: results/ or $PREPBENCH_RESULTS)");

  // sweep
  std::string engines_arg, fractions_arg = "1,5,15,25,50,75,100", config_name = "laptop";
  std::string sweep_out = "sweep.json", samples_dir = "sweep-work";
  bool no_limits = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Scalability sweep over dataset samples");
  sweep_cmd->add_option("--engines", engines_arg, "comma-separated engine names")->required();
  sweep_cmd->add_option("--pipeline", pipeline_file)->required();
  sweep_cmd->add_option("--dataset", in_path, "full dataset the samples come from")->required();
  sweep_cmd->add_option("--format", in_format)->check(CLI::IsMember({"csv", "parquet"}));
  sweep_cmd->add_option("--fractions", fractions_arg, "percentages");
  sweep_cmd->add_option("--config", config_name, "laptop|workstation|server");
  sweep_cmd->add_option("--out", sweep_out, "sweep results JSON");
  sweep_cmd->add_option("--work-dir", samples_dir, "where samples/pipelines are staged");
  sweep_cmd->add_flag("--no-limits", no_limits, "run in-process without resource limits");

  // minconfig
  auto* minconfig_cmd = app.add_subcommand("minconfig", "Minimum machine preset per sample fraction");
  minconfig_cmd->add_option("--engine", engine)->required();
  minconfig_cmd->add_option("--pipeline", pipeline_file)->required();
  minconfig_cmd->add_option("--dataset", in_path)->required();
  minconfig_cmd->add_option("--format", in_format)->check(CLI::IsMember({"csv", "parquet"}));
  minconfig_cmd->add_option("--fractions", fractions_arg);
  minconfig_cmd->add_option("--out", sweep_out, "results JSON");
  minconfig_cmd->add_option("--work-dir", samples_dir);

  // tpch
  std::string data_dir = "tpch-data", queries_arg = "all";
  double sf = 0.01;
  bool gen = false, do_validate = true, warm_tables = false;
  auto* tpch_cmd = app.add_subcommand("tpch", "Run the 22 queries with answer validation");
  tpch_cmd->add_option("--data-dir", data_dir);
  tpch_cmd->add_option("--sf", sf, "scale factor (desk-scale default 0.01)");
  tpch_cmd->add_option("--engine", engine, "engine name")->required();
  tpch_cmd->add_option("--queries", queries_arg, "comma-separated ids or 'all'");
  tpch_cmd->add_flag("--gen", gen, "generate the .tbl files first");
  tpch_cmd->add_flag("--no-validate,!--validate", do_validate, "skip oracle validation");
  tpch_cmd->add_flag("--warm-tables", warm_tables, "keep tables registered across queries");
  tpch_cmd->add_option("--results-dir", results_dir);

  // report
  std::string kind_name, inputs_arg, report_format = "svg", baseline = "columnar";
  auto* report_cmd = app.add_subcommand("report", "Render a report from results");
  report_cmd->add_option("--kind", kind_name,
                         "speedup_by_stage|speedup_by_preparator|io_runtime|eager_vs_lazy|"
                         "scalability_curves|min_config_matrix|tpch_bars|compatibility_matrix")
      ->required();
  report_cmd->add_option("--inputs", inputs_arg, "comma-separated results roots / sweep files");
  report_cmd->add_option("--out", out_path)->required();
  report_cmd->add_option("--format", report_format, "svg|png|csv|md")
      ->check(CLI::IsMember({"svg", "png", "csv", "md"}));
  report_cmd->add_option("--baseline", baseline, "baseline engine for speedups");

  // validate
  std::int64_t validate_rows = 1000;
  auto* validate_cmd = app.add_subcommand("validate", "Oracle-equivalence suite (27 preparators)");
  validate_cmd->add_option("--engine", engine, "engine name (default: all registered)");
  validate_cmd->add_option("--rows", validate_rows, "fixture rows");

  // schema
  auto* schema_cmd = app.add_subcommand("schema", "Print the pipeline file JSON schema");
  schema_cmd->add_option("--out", out_path, "write to a file instead of stdout");

  // hog (orchestration calibration target)
  double hog_gib = 1.0;
  auto* hog_cmd = app.add_subcommand("hog", "Reserve a virtual-memory footprint (calibration)");
  hog_cmd->add_option("--gib", hog_gib, "footprint in GiB")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage error
  }

  try {
    if (profile_cmd->parsed()) {
      const auto p = pb::profile(in_path, in_format);
      std::cout << pb::profile_to_json(p).dump(2) << "\n";
      return 0;
    }
    if (sample_cmd->parsed()) {
      pb::SampleSpec spec{fraction, seed, method};
      const auto p = pb::sample(in_path, in_format, spec, out_path);
      std::cout << pb::profile_to_json(p).dump(2) << "\n";
      return 0;
    }
    if (fixture_cmd->parsed()) {
      pb::FixtureSpec spec;
      spec.rows = rows;
      spec.columns = pb::parse_fixture_schema(schema_spec);
      spec.null_density = null_density;
      spec.duplicate_density = duplicate_density;
      spec.str_len_min = len_min;
      spec.str_len_max = len_max;
      spec.seed = seed;
      spec.format = in_format;
      pb::make_fixture(spec, out_path);
      std::cout << out_path << "\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      auto& adapter = engine_or_die(engine);
      const auto pipeline = pb::load_pipeline(pipeline_file);
      const auto mode = pb::mode_from_string(mode_name);
      pb::RunPlan plan{warmup, runs, timeout};
      pb::RunOptions options;
      options.results_root = results_dir.empty() ? results_root_default() : std::filesystem::path(results_dir);
      const auto records = pb::run(adapter, pipeline, *mode, plan, options);
      int failures = 0;
      for (const auto& r : records) failures += r.status != pb::RunStatus::OK;
      std::cout << records.size() << " records ("
                << (records.size() - static_cast<std::size_t>(failures)) << " OK) -> "
                << pb::results_dir(options.results_root, engine, pipeline.name, *mode).string()
                << "\n";
      return 0;
    }
    if (sweep_cmd->parsed() || minconfig_cmd->parsed()) {
      pb::register_builtin_adapters();
      const auto fractions_s = split_list(fractions_arg);
      std::vector<double> fractions;
      for (const auto& f : fractions_s) fractions.push_back(std::stod(f));
      const auto pipeline_for = make_fraction_pipelines(pipeline_file, in_path, in_format,
                                                        fractions, samples_dir, seed);
      pb::orchestrator::ProcessRuntime runtime;
      std::vector<pb::orchestrator::SweepResult> results;
      if (sweep_cmd->parsed()) {
        const auto engines = split_list(engines_arg);
        results = pb::orchestrator::scalability_sweep(
            engines, pipeline_for, std::filesystem::path(in_path).stem().string(), fractions,
            pb::orchestrator::preset(config_name), runtime);
      } else {
        results = pb::orchestrator::min_config_search(
            engine, pipeline_for, std::filesystem::path(in_path).stem().string(), fractions,
            runtime, pb::orchestrator::machine_presets());
      }
      std::ofstream out(sweep_out);
      out << pb::orchestrator::sweep_to_json(results).dump(2) << "\n";
      std::cout << results.size() << " sweep cells -> " << sweep_out << "\n";
      return 0;
    }
    if (tpch_cmd->parsed()) {
      const pb::tpch::ScaleFactor scale{sf};
      if (gen || !std::filesystem::exists(std::filesystem::path(data_dir) / "region.tbl"))
        pb::tpch::generate(data_dir, scale);
      auto& adapter = engine_or_die(engine);
      const auto ids = queries_arg == "all" ? pb::tpch::query_ids() : split_list(queries_arg);
      std::unique_ptr<pb::tpch::RelationalOracle> oracle;
      if (do_validate) oracle = std::make_unique<pb::tpch::RelationalOracle>(data_dir);

      std::filesystem::path record_file;
      if (!results_dir.empty() || do_validate) {
        const auto root = results_dir.empty() ? results_root_default() : std::filesystem::path(results_dir);
        const auto dir = pb::results_dir(root, engine, "tpch", pb::Mode::FunctionCore);
        std::filesystem::create_directories(dir);
        record_file = dir / "records.jsonl";
      }

      int failures = 0;
      if (warm_tables) pb::tpch::load_tpch(adapter, data_dir, scale);
      for (const auto& id : ids) {
        if (!warm_tables) {
          adapter.reset_session();
          pb::tpch::load_tpch(adapter, data_dir, scale);  // cold tables per query
        }
        const auto run = pb::tpch::run_query(adapter, id, scale);
        if (!record_file.empty()) pb::append_record(record_file, run.timing);
        if (run.timing.status != pb::RunStatus::OK) {
          ++failures;
          std::cout << id << ": " << to_string(run.timing.status) << " " << run.timing.detail
                    << "\n";
          continue;
        }
        if (do_validate) {
          const auto expected = oracle->answer(id, scale);
          const auto report = pb::tpch::validate(run.result, expected, id);
          failures += !report.passed;
          std::cout << id << ": " << (report.passed ? "PASS" : "FAIL")
                    << (report.passed ? "" : " " + report.first_mismatch) << " ("
                    << pb::render_value(pb::Value{*run.timing.wall_time}) << " s)\n";
        } else {
          std::cout << id << ": " << pb::render_value(pb::Value{*run.timing.wall_time}) << " s\n";
        }
      }
      return failures == 0 ? 0 : 1;
    }
    if (report_cmd->parsed()) {
      pb::report::ReportSpec spec;
      const auto kind = pb::report::report_kind_from_string(kind_name);
      if (!kind) {
        std::cerr << "unknown report kind '" << kind_name << "'\n";
        return 2;
      }
      spec.kind = *kind;
      for (const auto& input : split_list(inputs_arg))
        if (!input.empty()) spec.inputs.push_back(input);
      if (spec.inputs.empty()) spec.inputs.push_back(results_root_default());
      spec.output = out_path;
      spec.format = report_format;
      spec.baseline_engine = baseline;
      const auto written = pb::report::render(spec);
      std::cout << written.string() << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      pb::register_builtin_adapters();
      auto& registry = pb::AdapterRegistry::instance();
      std::vector<std::string> engines =
          engine.empty() ? std::vector<std::string>{"columnar", "lazycol"}
                         : std::vector<std::string>{engine};
      const auto scratch = std::filesystem::temp_directory_path() / "prepbench-validate";
      bool all_ok = true;
      for (const auto& name : engines) {
        if (!registry.has(name)) {
          // Optional plug-ins (GPU adapters) are reported, never failed.
          std::cout << name << ": SKIPPED (not registered)\n";
          continue;
        }
        auto& adapter = registry.get(name);
        const auto checks = pb::run_equivalence_suite(adapter, validate_rows, scratch);
        for (const auto& c : checks) {
          all_ok &= c.passed;
          std::cout << name << "/" << to_string(c.op) << ": " << (c.passed ? "OK" : "MISMATCH")
                    << (c.passed ? "" : " " + c.detail) << "\n";
        }
      }
      return all_ok ? 0 : 1;
    }
    if (schema_cmd->parsed()) {
      const auto doc = pb::pipeline_file_schema();
      if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        std::ofstream out(out_path);
        out << doc.dump(2) << "\n";
      }
      return 0;
    }
    if (hog_cmd->parsed()) {
      try {
        pb::orchestrator::memory_hog(hog_gib);
      } catch (const std::bad_alloc&) {
        std::cerr << "hog: reservation refused\n";
        return pb::kOomExitCode;
      }
      std::cout << "hog: reserved " << hog_gib << " GiB\n";
      return 0;
    }
  } catch (const pb::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
