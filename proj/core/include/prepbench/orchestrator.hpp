#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prepbench/executor.hpp"

namespace prepbench {
namespace orchestrator {

/// CPU/RAM preset for contained runs. Worker settings per engine default to
/// the CPU count.
struct MachineConfig {
  std::string name = "custom";  // laptop | workstation | server | custom
  int cpus = 0;
  double ram_gb = 0;
  std::map<std::string, int> engine_workers;

  int workers_for(const std::string& engine) const {
    const auto it = engine_workers.find(engine);
    return it != engine_workers.end() ? it->second : cpus;
  }
};

/// Shipped presets: laptop (8 CPUs, 16 GB), workstation (16, 64),
/// server (24, 128), in ascending order.
std::vector<MachineConfig> machine_presets();
MachineConfig preset(const std::string& name);

/// One contained job: either a pipeline run or a calibrated memory hog.
struct Job {
  std::string kind = "pipeline";  // pipeline | hog
  std::filesystem::path pipeline_file;
  std::string engine;
  Mode mode = Mode::PipelineFull;
  RunPlan plan{1, 3, 1800};
  MachineConfig config;
  double hog_gib = 0;  // virtual footprint for kind == "hog"
  std::filesystem::path results_root;

  nlohmann::json to_json() const;
  static Job from_json(const nlohmann::json& j);
};

struct JobResult {
  RunStatus status = RunStatus::OK;
  std::vector<TimingRecord> records;
  std::string detail;
};

/// A runtime that can execute a job under hard CPU and memory limits.
class ContainerRuntime {
public:
  virtual ~ContainerRuntime() = default;
  virtual bool available() const = 0;
  virtual std::string name() const = 0;
  /// Throws RuntimeUnavailable when the runtime is missing; never throws for
  /// job failures (those are classified into the result).
  virtual JobResult run(const Job& job) = 0;
};

/// Fork/exec runtime: RLIMIT_AS enforces the memory ceiling (no swap
/// escape), sched_setaffinity pins the CPU set, kill-on-timeout. The child
/// re-enters this binary via the internal `__job` entry point.
class ProcessRuntime final : public ContainerRuntime {
public:
  /// `self_binary`: path to the CLI executable (defaults to /proc/self/exe).
  explicit ProcessRuntime(std::filesystem::path self_binary = {});
  bool available() const override;
  std::string name() const override { return "process"; }
  JobResult run(const Job& job) override;

private:
  std::filesystem::path self_;
};

/// Shells out to docker with --cpus/--memory (swap disabled by setting
/// --memory-swap equal). Images are per engine: prepbench/<engine>.
class DockerRuntime final : public ContainerRuntime {
public:
  bool available() const override;
  std::string name() const override { return "docker"; }
  JobResult run(const Job& job) override;
};

/// Executes a job under the config's limits and returns its records (a
/// synthesized record carries the classification when the job died without
/// producing any).
std::vector<TimingRecord> run_contained(const Job& job, ContainerRuntime& runtime);

struct SweepResult {
  std::string engine;
  std::string dataset;
  double sample_fraction = 100.0;
  std::string config;  // preset name, or "x" when no preset succeeded
  RunStatus status = RunStatus::OK;
  std::optional<double> mean_wall_time;
};

/// Maps a sample fraction to the pipeline file bound to that fraction's
/// pre-generated sample (see dataset::sample).
using PipelineForFraction = std::function<std::filesystem::path(double)>;

/// For each fraction: tries presets in ascending order, records the first OK
/// preset, never probes a larger preset after a success; OOM-at-all yields
/// config "x". `probe_log` (optional) records every (fraction, preset)
/// actually attempted, in order.
std::vector<SweepResult> min_config_search(
    const std::string& engine, const PipelineForFraction& pipeline_for,
    const std::string& dataset_name, const std::vector<double>& fractions,
    ContainerRuntime& runtime, const std::vector<MachineConfig>& presets,
    std::vector<std::pair<double, std::string>>* probe_log = nullptr);

/// Full grid: |engines| x |fractions| results under one config.
std::vector<SweepResult> scalability_sweep(const std::vector<std::string>& engines,
                                           const PipelineForFraction& pipeline_for,
                                           const std::string& dataset_name,
                                           const std::vector<double>& fractions,
                                           const MachineConfig& config,
                                           ContainerRuntime& runtime);

/// The calibrated memory hog: reserves `gib` of anonymous virtual memory
/// (MAP_NORESERVE) and touches one byte per GiB. Returns normally or throws
/// std::bad_alloc when the ceiling refuses the reservation.
void memory_hog(double gib);

nlohmann::json sweep_to_json(const std::vector<SweepResult>& results);

}  // namespace orchestrator
}  // namespace prepbench
