#include "prepbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "prepbench/errors.hpp"

namespace prepbench::metrics {

std::vector<AggregatedTime> aggregate(const std::vector<TimingRecord>& records) {
  struct Group {
    double sum = 0;
    int ok = 0;
    std::map<RunStatus, int> failures;
  };
  std::map<std::tuple<std::string, std::string, int>, Group> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.engine, r.target, static_cast<int>(r.mode)}];
    if (r.status == RunStatus::OK && r.wall_time) {
      g.sum += *r.wall_time;
      g.ok += 1;
    } else {
      g.failures[r.status] += 1;
    }
  }
  std::vector<AggregatedTime> out;
  for (const auto& [key, g] : groups) {
    AggregatedTime a;
    a.engine = std::get<0>(key);
    a.target = std::get<1>(key);
    a.mode = static_cast<Mode>(std::get<2>(key));
    a.n_runs = g.ok;
    if (g.ok > 0) {
      a.mean_wall_time = g.sum / g.ok;
    } else {
      // No OK repetitions: propagate the dominant failure, never drop the group.
      RunStatus dominant = RunStatus::ERROR;
      int best = -1;
      for (const auto& [status, count] : g.failures)
        if (count > best) {
          best = count;
          dominant = status;
        }
      a.failure = dominant;
    }
    out.push_back(std::move(a));
  }
  return out;
}

SpeedupEntry speedup(const AggregatedTime& baseline, const AggregatedTime& lib) {
  if (baseline.target != lib.target || baseline.mode != lib.mode)
    throw IncomparableTargets("speedup requires matching target and mode (" + baseline.target +
                              " vs " + lib.target + ")");
  if (!baseline.mean_wall_time) throw MissingBaseline("baseline has no OK runs for " + baseline.target);
  if (!lib.mean_wall_time || *lib.mean_wall_time <= 0.0)
    throw IncomparableTargets("engine '" + lib.engine + "' has no usable mean for " + lib.target);
  return {lib.engine, lib.target, *baseline.mean_wall_time / *lib.mean_wall_time};
}

double nearest_rank_percentile(std::vector<double> pool, double pct) {
  if (pool.empty()) throw InvalidArgument("percentile of an empty pool");
  std::sort(pool.begin(), pool.end());
  const auto n = static_cast<double>(pool.size());
  const auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  if (rank <= 1) return pool.front();
  return pool[std::min<std::size_t>(rank, pool.size()) - 1];
}

std::vector<double> trim_pool(const std::vector<double>& pool, const TrimBand& band) {
  if (pool.empty()) return {};
  const double lo = nearest_rank_percentile(pool, band.lower_pct);
  const double hi = nearest_rank_percentile(pool, band.upper_pct);
  std::vector<double> kept;
  for (const double v : pool)
    if (v >= lo && v <= hi) kept.push_back(v);
  return kept;
}

namespace {

double mean_of(const std::vector<double>& values) {
  double sum = 0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

std::vector<ImpactEntry> impact(const std::map<Preparator, std::vector<double>>& per_prep_times,
                                const TrimBand& band) {
  std::map<Stage, double> stage_totals;
  std::map<Preparator, double> trimmed_means;
  for (const auto& [prep, pool] : per_prep_times) {
    if (pool.empty())
      throw InvalidArgument(std::string("empty time pool for preparator ") + to_string(prep));
    const auto kept = trim_pool(pool, band);
    const double m = kept.empty() ? mean_of(pool) : mean_of(kept);
    trimmed_means[prep] = m;
    stage_totals[stage_of(prep)] += m;
  }
  if (trimmed_means.empty()) throw EmptyStage("no preparator times to compute impact from");

  std::vector<ImpactEntry> out;
  for (const auto& [prep, m] : trimmed_means) {
    const Stage stage = stage_of(prep);
    const double total = stage_totals.at(stage);
    if (total <= 0.0) throw EmptyStage(std::string("stage ") + to_string(stage) + " has zero total time");
    out.push_back({prep, stage, m / total * 100.0});
  }
  return out;
}

std::vector<ImpactEntry> impact_from_records(const std::vector<TimingRecord>& records,
                                             const TrimBand& band, TrimScope scope) {
  if (scope == TrimScope::PerPreparator) {
    std::map<Preparator, std::vector<double>> pools;
    for (const auto& r : records) {
      if (r.mode != Mode::FunctionCore || r.status != RunStatus::OK || !r.wall_time) continue;
      const auto p = preparator_from_string(r.target);
      if (p) pools[*p].push_back(*r.wall_time);
    }
    if (pools.empty()) throw EmptyStage("no FUNCTION_CORE records to compute impact from");
    return impact(pools, band);
  }

  // Per-(preparator, engine): trim each engine's pool, then join.
  std::map<std::pair<Preparator, std::string>, std::vector<double>> engine_pools;
  for (const auto& r : records) {
    if (r.mode != Mode::FunctionCore || r.status != RunStatus::OK || !r.wall_time) continue;
    const auto p = preparator_from_string(r.target);
    if (p) engine_pools[{*p, r.engine}].push_back(*r.wall_time);
  }
  if (engine_pools.empty()) throw EmptyStage("no FUNCTION_CORE records to compute impact from");
  std::map<Preparator, std::vector<double>> joined;
  for (const auto& [key, pool] : engine_pools) {
    const auto kept = trim_pool(pool, band);
    auto& dst = joined[key.first];
    const auto& src = kept.empty() ? pool : kept;
    dst.insert(dst.end(), src.begin(), src.end());
  }
  return impact(joined, {0.0, 100.0});  // already trimmed per engine
}

}  // namespace prepbench::metrics
