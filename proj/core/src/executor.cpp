#include "prepbench/executor.hpp"

#include <sys/resource.h>

#include <chrono>
#include <fstream>
#include <map>

#include "prepbench/errors.hpp"
#include "prepbench/reference_engine.hpp"

namespace prepbench {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::FunctionCore: return "function-core";
    case Mode::PipelineStage: return "pipeline-stage";
    case Mode::PipelineFull: return "pipeline-full";
  }
  return "?";
}

std::optional<Mode> mode_from_string(const std::string& s) {
  if (s == "function-core") return Mode::FunctionCore;
  if (s == "pipeline-stage") return Mode::PipelineStage;
  if (s == "pipeline-full") return Mode::PipelineFull;
  return std::nullopt;
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::OK: return "OK";
    case RunStatus::OOM: return "OOM";
    case RunStatus::UNSUPPORTED: return "UNSUPPORTED";
    case RunStatus::ERROR: return "ERROR";
    case RunStatus::TIMEOUT: return "TIMEOUT";
  }
  return "?";
}

std::optional<RunStatus> run_status_from_string(const std::string& s) {
  if (s == "OK") return RunStatus::OK;
  if (s == "OOM") return RunStatus::OOM;
  if (s == "UNSUPPORTED") return RunStatus::UNSUPPORTED;
  if (s == "ERROR") return RunStatus::ERROR;
  if (s == "TIMEOUT") return RunStatus::TIMEOUT;
  return std::nullopt;
}

nlohmann::json TimingRecord::to_json() const {
  nlohmann::json j{
      {"engine", engine},       {"pipeline", pipeline},
      {"target", target},       {"mode", std::string(to_string(mode))},
      {"run_index", run_index}, {"status", std::string(to_string(status))},
  };
  if (wall_time) j["wall_time"] = *wall_time;
  else j["wall_time"] = nullptr;
  if (peak_memory) j["peak_memory"] = *peak_memory;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

TimingRecord TimingRecord::from_json(const nlohmann::json& j) {
  TimingRecord r;
  r.engine = j.at("engine").get<std::string>();
  r.pipeline = j.at("pipeline").get<std::string>();
  r.target = j.at("target").get<std::string>();
  const auto mode = mode_from_string(j.at("mode").get<std::string>());
  if (!mode) throw ParseError("bad mode in record: " + j.at("mode").get<std::string>());
  r.mode = *mode;
  r.run_index = j.at("run_index").get<int>();
  const auto status = run_status_from_string(j.at("status").get<std::string>());
  if (!status) throw ParseError("bad status in record");
  r.status = *status;
  if (j.contains("wall_time") && !j["wall_time"].is_null())
    r.wall_time = j["wall_time"].get<double>();
  if (j.contains("peak_memory") && !j["peak_memory"].is_null())
    r.peak_memory = j["peak_memory"].get<std::int64_t>();
  if (j.contains("detail")) r.detail = j["detail"].get<std::string>();
  return r;
}

RunStatus classify_failure(const std::exception& error) {
  if (const auto* ee = dynamic_cast<const EngineError*>(&error))
    return ee->is_oom() ? RunStatus::OOM : RunStatus::ERROR;
  if (dynamic_cast<const UnsupportedOperation*>(&error)) return RunStatus::UNSUPPORTED;
  if (dynamic_cast<const std::bad_alloc*>(&error)) return RunStatus::OOM;
  return RunStatus::ERROR;
}

RunStatus classify_exit(int exit_code, int term_signal, bool timed_out) {
  if (timed_out) return RunStatus::TIMEOUT;
  if (term_signal == 9) return RunStatus::OOM;  // memory-kill
  if (exit_code == kOomExitCode) return RunStatus::OOM;
  if (exit_code == 0) return RunStatus::OK;
  return RunStatus::ERROR;
}

std::filesystem::path results_dir(const std::filesystem::path& root, const std::string& engine,
                                  const std::string& pipeline, Mode mode) {
  return root / engine / pipeline / to_string(mode);
}

void append_record(const std::filesystem::path& file, const TimingRecord& record) {
  std::ofstream out(file, std::ios::app);
  if (!out) throw IOError("cannot append to " + file.string());
  out << record.to_json().dump() << '\n';
  out.flush();
}

std::vector<TimingRecord> load_records(const std::filesystem::path& root) {
  std::vector<TimingRecord> records;
  if (!std::filesystem::exists(root)) return records;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_regular_file(root)) {
    files.push_back(root);
  } else {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
      if (entry.is_regular_file() && entry.path().filename() == "records.jsonl")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  }
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      records.push_back(TimingRecord::from_json(nlohmann::json::parse(line)));
    }
  }
  return records;
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t peak_rss_bytes() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<std::int64_t>(usage.ru_maxrss) * 1024;
}

/// A timed span of steps ending in one state materialization.
struct Span {
  std::string target;
  std::vector<std::size_t> steps;
};

std::vector<Span> spans_for(const PipelineSpec& pipeline, Mode mode) {
  std::vector<Span> spans;
  switch (mode) {
    case Mode::FunctionCore:
      for (std::size_t i = 0; i < pipeline.steps.size(); ++i)
        spans.push_back({to_string(pipeline.steps[i].op), {i}});
      break;
    case Mode::PipelineStage: {
      for (std::size_t i = 0; i < pipeline.steps.size(); ++i) {
        const Stage stage = stage_of(pipeline.steps[i].op);
        if (spans.empty() || to_string(stage) != spans.back().target)
          spans.push_back({to_string(stage), {}});
        spans.back().steps.push_back(i);
      }
      break;
    }
    case Mode::PipelineFull: {
      Span all{"FULL", {}};
      for (std::size_t i = 0; i < pipeline.steps.size(); ++i) all.steps.push_back(i);
      spans.push_back(std::move(all));
      break;
    }
  }
  return spans;
}

PreparatorCall bind_read(const PipelineSpec& pipeline, const PreparatorCall& call,
                         const RunOptions& options) {
  PreparatorCall bound = call;
  if (call.op == Preparator::Read) {
    if (!bound.args.contains("path")) bound.args["path"] = pipeline.dataset.path;
    if (!bound.args.contains("format")) bound.args["format"] = pipeline.dataset.format;
  }
  if (call.op == Preparator::Write && !options.scratch_dir.empty()) {
    const std::filesystem::path p = bound.args["path"].get<std::string>();
    if (p.is_relative()) bound.args["path"] = (options.scratch_dir / p).string();
  }
  return bound;
}

/// Executes the steps of one span on the running state. Observational EDA
/// steps are materialized at their position and discarded; everything else
/// threads through. Returns the state after the span's final materialization.
FrameHandle execute_span(Adapter& adapter, const PipelineSpec& pipeline, const Span& span,
                         FrameHandle state, const RunOptions& options) {
  for (const std::size_t i : span.steps) {
    const PreparatorCall call = bind_read(pipeline, pipeline.steps[i], options);
    FrameHandle result = adapter.apply(state, call);
    if (refeng::threads_state(call.op)) {
      state = std::move(result);
    } else {
      adapter.materialize(result);  // observe the summary; frame unchanged
    }
  }
  return adapter.materialize(state);
}

}  // namespace

std::vector<TimingRecord> run(Adapter& adapter, const PipelineSpec& pipeline, Mode mode,
                              const RunPlan& plan, const RunOptions& options) {
  if (plan.measured_runs < 1) throw InvalidArgument("measured_runs must be >= 1");
  const PipelineSpec spec = validate_pipeline(pipeline);
  const std::vector<Span> spans = spans_for(spec, mode);
  const std::string engine = adapter.descriptor().engine.name;

  RunOptions opts = options;
  if (opts.scratch_dir.empty())
    opts.scratch_dir = std::filesystem::temp_directory_path() / "prepbench-scratch";
  std::filesystem::create_directories(opts.scratch_dir);

  std::filesystem::path record_file;
  if (!opts.results_root.empty()) {
    const auto dir = results_dir(opts.results_root, engine, spec.name, mode);
    std::filesystem::create_directories(dir);
    record_file = dir / "records.jsonl";
  }

  std::vector<TimingRecord> records;
  const auto emit = [&](TimingRecord r) {
    if (!record_file.empty()) append_record(record_file, r);
    records.push_back(std::move(r));
  };

  // Warm-up executions produce no records and feed no metric.
  for (int w = 0; w < plan.warmup_runs; ++w) {
    try {
      FrameHandle state;
      for (const auto& span : spans) state = execute_span(adapter, spec, span, state, opts);
    } catch (const std::exception&) {
      // Warm-up failures surface again as recorded failures below.
    }
  }

  std::map<std::string, int> consecutive_oom;
  for (int run_index = 0; run_index < plan.measured_runs; ++run_index) {
    if (adapter.descriptor().reset_between_runs) adapter.reset_session();
    FrameHandle state;
    std::optional<RunStatus> abort_status;  // failure propagated within this run

    for (const auto& span : spans) {
      TimingRecord rec;
      rec.engine = engine;
      rec.pipeline = spec.name;
      rec.target = span.target;
      rec.mode = mode;
      rec.run_index = run_index;

      if (abort_status) {
        // Skipped because an earlier span failed this run; keep the record
        // count invariant and carry the causing status.
        rec.status = *abort_status;
        rec.detail = "skipped: earlier target failed this run";
        emit(std::move(rec));
        continue;
      }
      if (consecutive_oom[span.target] >= 2) {
        rec.status = RunStatus::OOM;
        rec.detail = "aborted after 2 consecutive OOM runs";
        abort_status = RunStatus::OOM;  // state is gone for the rest of the run
        emit(std::move(rec));
        continue;
      }

      const auto t0 = Clock::now();
      try {
        state = execute_span(adapter, spec, span, state, opts);
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        if (secs > plan.timeout_seconds) {
          rec.status = RunStatus::TIMEOUT;
          rec.detail = "exceeded plan timeout";
          abort_status = RunStatus::TIMEOUT;
        } else {
          rec.status = RunStatus::OK;
          rec.wall_time = secs;
        }
        consecutive_oom[span.target] = 0;
      } catch (const std::exception& e) {
        rec.status = classify_failure(e);
        rec.detail = e.what();
        if (rec.status == RunStatus::OOM) consecutive_oom[span.target] += 1;
        abort_status = rec.status;
      }
      rec.peak_memory = peak_rss_bytes();
      emit(std::move(rec));
    }
  }
  return records;
}

}  // namespace prepbench
