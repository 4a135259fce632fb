#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prepbench/executor.hpp"
#include "prepbench/taxonomy.hpp"

namespace prepbench {
namespace metrics {

/// Mean over OK records of one (engine, target, mode) group; groups with no
/// OK records carry the dominant failure status instead of a mean.
struct AggregatedTime {
  std::string engine;
  std::string target;
  Mode mode = Mode::FunctionCore;
  std::optional<double> mean_wall_time;
  int n_runs = 0;  // how many OK records contributed
  std::optional<RunStatus> failure;

  bool operator==(const AggregatedTime&) const = default;
};

std::vector<AggregatedTime> aggregate(const std::vector<TimingRecord>& records);

struct SpeedupEntry {
  std::string engine;
  std::string target;
  double speedup = 1.0;  // baseline mean / engine mean
};

/// Both sides must share target and mode and have positive means.
SpeedupEntry speedup(const AggregatedTime& baseline, const AggregatedTime& lib);

struct ImpactEntry {
  Preparator preparator = Preparator::Read;
  Stage stage = Stage::IO;
  double impact_pct = 0.0;
};

struct TrimBand {
  double lower_pct = 20.0;
  double upper_pct = 80.0;
};

/// Nearest-rank percentile: the value at 1-based rank ceil(p/100 * n) of the
/// ascending pool (rank 0 clamps to the minimum).
double nearest_rank_percentile(std::vector<double> pool, double pct);

/// Drops values strictly below the lower and strictly above the upper
/// nearest-rank percentile of the pool.
std::vector<double> trim_pool(const std::vector<double>& pool, const TrimBand& band);

/// Per preparator: trimmed-pool mean over the band; impact = that mean as a
/// percentage of the sum of trimmed means across the preparator's stage.
/// Only stages present in the input appear in the output.
std::vector<ImpactEntry> impact(const std::map<Preparator, std::vector<double>>& per_prep_times,
                                const TrimBand& band = {});

/// Pool scope for trimming: one pool per preparator (default, values joined
/// across engines and pipelines) or one per (preparator, engine).
enum class TrimScope { PerPreparator, PerPreparatorEngine };

/// Builds per-preparator pools from FUNCTION_CORE records and computes
/// impacts. With PerPreparatorEngine, each engine's pool is trimmed
/// separately and the trimmed values are then joined.
std::vector<ImpactEntry> impact_from_records(const std::vector<TimingRecord>& records,
                                             const TrimBand& band = {},
                                             TrimScope scope = TrimScope::PerPreparator);

}  // namespace metrics
}  // namespace prepbench
