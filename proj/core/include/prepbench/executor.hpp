#pragma once

#include <filesystem>
#include <optional>

#include "prepbench/adapter.hpp"
#include "prepbench/taxonomy.hpp"

namespace prepbench {

/// The three measurement settings. FUNCTION_CORE materializes after every
/// step, PIPELINE_STAGE at each stage boundary, PIPELINE_FULL once at the
/// end of the pipeline.
enum class Mode { FunctionCore, PipelineStage, PipelineFull };

const char* to_string(Mode m);
std::optional<Mode> mode_from_string(const std::string& s);

enum class RunStatus { OK, OOM, UNSUPPORTED, ERROR, TIMEOUT };

const char* to_string(RunStatus s);
std::optional<RunStatus> run_status_from_string(const std::string& s);

/// One measured execution. `target` is a preparator name in FUNCTION_CORE, a
/// stage name in PIPELINE_STAGE, and "FULL" in PIPELINE_FULL.
struct TimingRecord {
  std::string engine;
  std::string pipeline;
  std::string target;
  Mode mode = Mode::FunctionCore;
  int run_index = 0;
  std::optional<double> wall_time;  // seconds, monotonic clock; absent unless OK
  RunStatus status = RunStatus::OK;
  std::optional<std::int64_t> peak_memory;  // bytes (ru_maxrss high watermark)
  std::string detail;                       // failure message; not part of the wire schema

  nlohmann::json to_json() const;
  static TimingRecord from_json(const nlohmann::json& j);
};

struct RunPlan {
  int warmup_runs = 1;
  int measured_runs = 10;
  double timeout_seconds = 1800;  // 30 min per target
};

struct RunOptions {
  /// Root of the results layout results/<engine>/<pipeline>/<mode>/; empty
  /// disables persistence. Records are appended (one JSON object per line)
  /// as they are produced, so partial results survive crashes.
  std::filesystem::path results_root;
  /// Directory for write-step outputs; falls back to a temp dir.
  std::filesystem::path scratch_dir;
};

/// Runs the pipeline under one mode. Emits exactly one record per
/// (target, run_index); failures are encoded in record status, never thrown.
/// Warm-up executions produce no records. After 2 consecutive OOMs on the
/// same target, its remaining repetitions are recorded as OOM unexecuted.
std::vector<TimingRecord> run(Adapter& adapter, const PipelineSpec& pipeline, Mode mode,
                              const RunPlan& plan, const RunOptions& options = {});

/// Maps a failure to a record status: OOM for allocation/memory-kill
/// failures, UNSUPPORTED for declared gaps, ERROR otherwise.
RunStatus classify_failure(const std::exception& error);

/// Classification for containerized runs that ended by exit code / signal.
RunStatus classify_exit(int exit_code, int term_signal, bool timed_out);

/// Child processes exit with this code when the job died of allocation
/// failure; the parent maps it back to OOM.
inline constexpr int kOomExitCode = 77;

/// The fixed results layout for one (engine, pipeline, mode).
std::filesystem::path results_dir(const std::filesystem::path& root, const std::string& engine,
                                  const std::string& pipeline, Mode mode);

/// Loads every records.jsonl under `root` (recursively).
std::vector<TimingRecord> load_records(const std::filesystem::path& root);

void append_record(const std::filesystem::path& file, const TimingRecord& record);

}  // namespace prepbench
