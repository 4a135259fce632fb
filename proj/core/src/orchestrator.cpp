#include "prepbench/orchestrator.hpp"

#include <sched.h>
#include <signal.h>
#include <sys/mman.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <fstream>
#include <thread>

#include "prepbench/errors.hpp"

namespace prepbench::orchestrator {

std::vector<MachineConfig> machine_presets() {
  return {
      {"laptop", 8, 16, {}},
      {"workstation", 16, 64, {}},
      {"server", 24, 128, {}},
  };
}

MachineConfig preset(const std::string& name) {
  for (const auto& p : machine_presets())
    if (p.name == name) return p;
  throw InvalidArgument("unknown machine preset '" + name + "'");
}

nlohmann::json Job::to_json() const {
  nlohmann::json j{
      {"kind", kind},
      {"pipeline_file", pipeline_file.string()},
      {"engine", engine},
      {"mode", std::string(to_string(mode))},
      {"plan", {{"warmup_runs", plan.warmup_runs},
                {"measured_runs", plan.measured_runs},
                {"timeout_seconds", plan.timeout_seconds}}},
      {"config", {{"name", config.name}, {"cpus", config.cpus}, {"ram_gb", config.ram_gb}}},
      {"hog_gib", hog_gib},
      {"results_root", results_root.string()},
  };
  if (!config.engine_workers.empty()) j["config"]["engine_workers"] = config.engine_workers;
  return j;
}

Job Job::from_json(const nlohmann::json& j) {
  Job job;
  job.kind = j.value("kind", "pipeline");
  job.pipeline_file = j.value("pipeline_file", "");
  job.engine = j.value("engine", "");
  if (const auto m = mode_from_string(j.value("mode", "pipeline-full"))) job.mode = *m;
  if (j.contains("plan")) {
    job.plan.warmup_runs = j["plan"].value("warmup_runs", 1);
    job.plan.measured_runs = j["plan"].value("measured_runs", 3);
    job.plan.timeout_seconds = j["plan"].value("timeout_seconds", 1800.0);
  }
  if (j.contains("config")) {
    job.config.name = j["config"].value("name", "custom");
    job.config.cpus = j["config"].value("cpus", 0);
    job.config.ram_gb = j["config"].value("ram_gb", 0.0);
    if (j["config"].contains("engine_workers"))
      job.config.engine_workers =
          j["config"]["engine_workers"].get<std::map<std::string, int>>();
  }
  job.hog_gib = j.value("hog_gib", 0.0);
  job.results_root = j.value("results_root", "");
  return job;
}

void memory_hog(double gib) {
  const auto bytes = static_cast<std::size_t>(gib * 1024.0 * 1024.0 * 1024.0);
  // MAP_NORESERVE keeps the reservation honest under RLIMIT_AS without
  // needing physical pages: the ceiling applies to address space.
  void* p = mmap(nullptr, bytes, PROT_READ | PROT_WRITE,
                 MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (p == MAP_FAILED) throw std::bad_alloc();
  auto* bytes_ptr = static_cast<volatile char*>(p);
  for (std::size_t off = 0; off < bytes; off += 1024ull * 1024 * 1024) bytes_ptr[off] = 1;
  if (bytes > 0) bytes_ptr[bytes - 1] = 1;
  munmap(p, bytes);
}

ProcessRuntime::ProcessRuntime(std::filesystem::path self_binary) : self_(std::move(self_binary)) {
  if (self_.empty()) self_ = "/proc/self/exe";
}

bool ProcessRuntime::available() const { return std::filesystem::exists(self_); }

JobResult ProcessRuntime::run(const Job& job) {
  if (!available())
    throw RuntimeUnavailable("process runtime: cannot resolve executable " + self_.string());

  const auto scratch = std::filesystem::temp_directory_path() /
                       ("prepbench-job-" + std::to_string(::getpid()) + "-" +
                        std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::filesystem::create_directories(scratch);
  const auto job_file = scratch / "job.json";
  const auto results_root = job.results_root.empty() ? scratch / "results" : job.results_root;
  {
    Job child_job = job;
    child_job.results_root = results_root;
    std::ofstream out(job_file);
    out << child_job.to_json().dump();
  }

  const pid_t pid = fork();
  if (pid < 0) throw RuntimeUnavailable("fork failed");
  if (pid == 0) {
    // Child: apply the machine config, then re-enter the CLI.
    if (job.config.ram_gb > 0) {
      const auto limit = static_cast<rlim_t>(job.config.ram_gb * 1024.0 * 1024.0 * 1024.0);
      rlimit rl{limit, limit};
      setrlimit(RLIMIT_AS, &rl);
    }
    if (job.config.cpus > 0) {
      cpu_set_t set;
      CPU_ZERO(&set);
      const long available_cpus = sysconf(_SC_NPROCESSORS_ONLN);
      for (int c = 0; c < job.config.cpus && c < available_cpus; ++c) CPU_SET(c, &set);
      sched_setaffinity(0, sizeof(set), &set);
    }
    const std::string workers = std::to_string(job.config.workers_for(job.engine));
    setenv("PREPBENCH_WORKERS", workers.c_str(), 1);
    const std::string self = self_.string();
    execl(self.c_str(), self.c_str(), "__job", job_file.c_str(), nullptr);
    _exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(job.plan.timeout_seconds));
  bool timed_out = false;
  int wstatus = 0;
  while (true) {
    const pid_t r = waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw RuntimeUnavailable("waitpid failed");
    if (std::chrono::steady_clock::now() > deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &wstatus, 0);
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }

  JobResult result;
  const int exit_code = WIFEXITED(wstatus) ? WEXITSTATUS(wstatus) : -1;
  const int term_signal = WIFSIGNALED(wstatus) ? WTERMSIG(wstatus) : 0;
  result.status = classify_exit(exit_code, term_signal, timed_out);
  if (exit_code == 127) result.detail = "exec failed";
  result.records = load_records(results_root);
  return result;
}

bool DockerRuntime::available() const {
  return std::system("docker info > /dev/null 2>&1") == 0;
}

JobResult DockerRuntime::run(const Job& job) {
  if (!available()) throw RuntimeUnavailable("docker daemon is not reachable");
  const auto scratch = std::filesystem::temp_directory_path() /
                       ("prepbench-docker-" + std::to_string(::getpid()));
  std::filesystem::create_directories(scratch);
  const auto job_file = scratch / "job.json";
  {
    Job child_job = job;
    child_job.results_root = "/work/results";
    std::ofstream out(job_file);
    out << child_job.to_json().dump();
  }
  // One image per engine keeps dependency sets disjoint; memory-swap equals
  // memory so the ceiling is hard.
  std::string cmd = "docker run --rm --cpus " + std::to_string(job.config.cpus) + " --memory " +
                    std::to_string(static_cast<long long>(job.config.ram_gb * 1024)) + "m" +
                    " --memory-swap " + std::to_string(static_cast<long long>(job.config.ram_gb * 1024)) +
                    "m -v " + scratch.string() + ":/work -e PREPBENCH_WORKERS=" +
                    std::to_string(job.config.workers_for(job.engine)) + " prepbench/" + job.engine +
                    " __job /work/job.json > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  JobResult result;
  const int exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  // 137 = SIGKILL from the cgroup OOM killer.
  result.status = classify_exit(exit_code == 137 ? 0 : exit_code, exit_code == 137 ? 9 : 0, false);
  result.records = load_records(scratch / "results");
  return result;
}

std::vector<TimingRecord> run_contained(const Job& job, ContainerRuntime& runtime) {
  JobResult result = runtime.run(job);
  if (!result.records.empty() && result.status == RunStatus::OK) return result.records;
  if (result.records.empty() || result.status != RunStatus::OK) {
    TimingRecord rec;
    rec.engine = job.engine.empty() ? "host" : job.engine;
    rec.pipeline = job.kind == "hog" ? "hog" : job.pipeline_file.stem().string();
    rec.target = "FULL";
    rec.mode = job.mode;
    rec.run_index = 0;
    rec.status = result.status;
    rec.detail = result.detail.empty() ? std::string("classified by ") + runtime.name()
                                       : result.detail;
    result.records.push_back(std::move(rec));
  }
  return result.records;
}

namespace {

SweepResult result_of(const std::string& engine, const std::string& dataset, double fraction,
                      const std::string& config_name, const std::vector<TimingRecord>& records) {
  SweepResult res;
  res.engine = engine;
  res.dataset = dataset;
  res.sample_fraction = fraction;
  res.config = config_name;
  double sum = 0;
  int ok = 0;
  RunStatus worst = RunStatus::OK;
  for (const auto& r : records) {
    if (r.status == RunStatus::OK && r.wall_time) {
      sum += *r.wall_time;
      ++ok;
    } else if (r.status != RunStatus::OK) {
      worst = r.status;
    }
  }
  if (ok > 0 && worst == RunStatus::OK) {
    res.status = RunStatus::OK;
    res.mean_wall_time = sum / ok;
  } else {
    res.status = worst == RunStatus::OK ? RunStatus::ERROR : worst;
  }
  return res;
}

}  // namespace

std::vector<SweepResult> min_config_search(
    const std::string& engine, const PipelineForFraction& pipeline_for,
    const std::string& dataset_name, const std::vector<double>& fractions,
    ContainerRuntime& runtime, const std::vector<MachineConfig>& presets,
    std::vector<std::pair<double, std::string>>* probe_log) {
  std::vector<SweepResult> out;
  for (const double fraction : fractions) {
    bool solved = false;
    SweepResult last;
    for (const auto& config : presets) {
      if (probe_log) probe_log->push_back({fraction, config.name});
      Job job;
      job.kind = "pipeline";
      job.pipeline_file = pipeline_for(fraction);
      job.engine = engine;
      job.mode = Mode::PipelineFull;
      job.config = config;
      const auto records = run_contained(job, runtime);
      last = result_of(engine, dataset_name, fraction, config.name, records);
      if (last.status == RunStatus::OK) {
        out.push_back(last);
        solved = true;
        break;  // never probe a larger preset after a success
      }
    }
    if (!solved) {
      last.config = "x";  // no preset could run it
      out.push_back(last);
    }
  }
  return out;
}

std::vector<SweepResult> scalability_sweep(const std::vector<std::string>& engines,
                                           const PipelineForFraction& pipeline_for,
                                           const std::string& dataset_name,
                                           const std::vector<double>& fractions,
                                           const MachineConfig& config,
                                           ContainerRuntime& runtime) {
  std::vector<SweepResult> out;
  for (const auto& engine : engines) {
    for (const double fraction : fractions) {
      Job job;
      job.kind = "pipeline";
      job.pipeline_file = pipeline_for(fraction);
      job.engine = engine;
      job.mode = Mode::PipelineFull;
      job.config = config;
      const auto records = run_contained(job, runtime);
      out.push_back(result_of(engine, dataset_name, fraction, config.name, records));
    }
  }
  return out;
}

nlohmann::json sweep_to_json(const std::vector<SweepResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j{
        {"engine", r.engine},
        {"dataset", r.dataset},
        {"sample_fraction", r.sample_fraction},
        {"config", r.config},
        {"status", std::string(to_string(r.status))},
    };
    if (r.mean_wall_time) j["mean_wall_time"] = *r.mean_wall_time;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace prepbench::orchestrator
