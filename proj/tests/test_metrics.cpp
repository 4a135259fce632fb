#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "prepbench/errors.hpp"
#include "prepbench/metrics.hpp"

using namespace prepbench;
using namespace prepbench::metrics;

namespace {

TimingRecord rec(const std::string& engine, const std::string& target, double secs,
                 RunStatus status = RunStatus::OK, Mode mode = Mode::FunctionCore) {
  TimingRecord r;
  r.engine = engine;
  r.target = target;
  r.mode = mode;
  r.status = status;
  if (status == RunStatus::OK) r.wall_time = secs;
  return r;
}

AggregatedTime agg(const std::string& engine, const std::string& target, double mean) {
  AggregatedTime a;
  a.engine = engine;
  a.target = target;
  a.mode = Mode::FunctionCore;
  a.mean_wall_time = mean;
  a.n_runs = 10;
  return a;
}

/// Nearest-rank percentile written independently of the implementation.
double independent_percentile(std::vector<double> pool, double pct) {
  std::sort(pool.begin(), pool.end());
  std::size_t rank = 0;
  const double exact = pct / 100.0 * static_cast<double>(pool.size());
  rank = static_cast<std::size_t>(exact);
  if (static_cast<double>(rank) < exact) ++rank;  // ceil
  if (rank < 1) rank = 1;
  if (rank > pool.size()) rank = pool.size();
  return pool[rank - 1];
}

std::vector<double> independent_trim(const std::vector<double>& pool, double lo_pct, double hi_pct) {
  const double lo = independent_percentile(pool, lo_pct);
  const double hi = independent_percentile(pool, hi_pct);
  std::vector<double> kept;
  for (const double v : pool)
    if (!(v < lo) && !(v > hi)) kept.push_back(v);
  return kept;
}

}  // namespace

TEST_CASE("aggregate means OK records and propagates failures") {
  const auto out = aggregate({rec("e", "sort", 2.0), rec("e", "sort", 4.0)});
  REQUIRE(out.size() == 1);
  CHECK(out[0].mean_wall_time == 3.0);
  CHECK(out[0].n_runs == 2);

  const auto oom = aggregate({rec("e", "join", 0, RunStatus::OOM), rec("e", "join", 0, RunStatus::OOM)});
  REQUIRE(oom.size() == 1);
  CHECK_FALSE(oom[0].mean_wall_time.has_value());
  CHECK(oom[0].failure == RunStatus::OOM);
  CHECK(oom[0].n_runs == 0);

  std::vector<TimingRecord> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(rec("e", "read", 1.0 + i));
  CHECK(aggregate(ten)[0].n_runs == 10);
}

TEST_CASE("speedup is the baseline/engine mean ratio") {
  CHECK(speedup(agg("base", "sort", 10.0), agg("lib", "sort", 5.0)).speedup == 2.0);
  CHECK(speedup(agg("base", "sort", 10.0), agg("lib", "sort", 10.0)).speedup == 1.0);
  CHECK_THROWS_AS(speedup(agg("base", "sort", 10.0), agg("lib", "join", 5.0)),
                  IncomparableTargets);
  AggregatedTime missing = agg("base", "sort", 0.0);
  missing.mean_wall_time.reset();
  CHECK_THROWS_AS(speedup(missing, agg("lib", "sort", 5.0)), MissingBaseline);
  AggregatedTime oom = agg("lib", "sort", 0.0);
  oom.mean_wall_time.reset();
  oom.failure = RunStatus::OOM;
  CHECK_THROWS_AS(speedup(agg("base", "sort", 10.0), oom), IncomparableTargets);
}

TEST_CASE("speedup of an aggregate against itself is exactly one") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto x = agg("e", "t", 0.001 + static_cast<double>(rng() % 100000) / 1000.0);
    CHECK(speedup(x, x).speedup == 1.0);
  }
}

TEST_CASE("impact of a single-preparator stage is forced to 100") {
  const auto out = impact({{Preparator::Dedup, {1.0, 2.0, 3.0}}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].impact_pct == 100.0);
  CHECK(out[0].stage == Stage::DC);
}

TEST_CASE("two preparators with trimmed means 1s and 3s yield 25/75") {
  const auto out = impact({{Preparator::Dedup, {1.0, 1.0, 1.0}},
                           {Preparator::FillNa, {3.0, 3.0, 3.0}}});
  REQUIRE(out.size() == 2);
  double dedup_pct = 0, fillna_pct = 0;
  for (const auto& e : out) {
    if (e.preparator == Preparator::Dedup) dedup_pct = e.impact_pct;
    if (e.preparator == Preparator::FillNa) fillna_pct = e.impact_pct;
  }
  CHECK(dedup_pct == 25.0);
  CHECK(fillna_pct == 75.0);
}

TEST_CASE("trimming matches an independently written nearest-rank routine") {
  // The spec's worked pool: one extreme value falls outside the 20-80 band.
  const std::vector<double> pool = {1, 1, 1, 1, 100};
  const auto kept = trim_pool(pool, {20, 80});
  const auto expected = independent_trim(pool, 20, 80);
  CHECK(kept == expected);
  CHECK(kept == std::vector<double>{1, 1, 1, 1});

  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> random_pool;
    const std::size_t n = 1 + rng() % 40;
    for (std::size_t k = 0; k < n; ++k)
      random_pool.push_back(static_cast<double>(rng() % 10000) / 7.0);
    CHECK(nearest_rank_percentile(random_pool, 20) == independent_percentile(random_pool, 20));
    CHECK(nearest_rank_percentile(random_pool, 80) == independent_percentile(random_pool, 80));
    auto mine = trim_pool(random_pool, {20, 80});
    auto theirs = independent_trim(random_pool, 20, 80);
    std::sort(mine.begin(), mine.end());
    std::sort(theirs.begin(), theirs.end());
    CHECK(mine == theirs);
  }
}

TEST_CASE("trimming with the (0, 100) band is the identity") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> pool;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t k = 0; k < n; ++k) pool.push_back(static_cast<double>(rng() % 1000));
    CHECK(trim_pool(pool, {0, 100}) == pool);
  }
}

TEST_CASE("stage impacts sum to 100 within 1e-6") {
  std::mt19937_64 rng(11);
  std::map<Preparator, std::vector<double>> pools;
  for (const Preparator p : all_preparators()) {
    std::vector<double> pool;
    const std::size_t n = 3 + rng() % 20;
    for (std::size_t k = 0; k < n; ++k)
      pool.push_back(0.001 + static_cast<double>(rng() % 100000) / 3333.0);
    pools[p] = std::move(pool);
  }
  const auto out = impact(pools);
  std::map<Stage, double> sums;
  for (const auto& e : out) {
    CHECK(e.impact_pct >= 0.0);
    CHECK(e.impact_pct <= 100.0);
    sums[e.stage] += e.impact_pct;
  }
  REQUIRE(sums.size() == 4);
  for (const auto& [stage, total] : sums) CHECK(std::abs(total - 100.0) <= 1e-6);
}

TEST_CASE("speedups and impacts are invariant under time scaling") {
  std::mt19937_64 rng(13);
  for (const double c : {3.0, 0.25, 17.5}) {
    // Speedups.
    const double bt = 0.5 + static_cast<double>(rng() % 1000) / 100.0;
    const double lt = 0.5 + static_cast<double>(rng() % 1000) / 100.0;
    const double plain = speedup(agg("b", "t", bt), agg("l", "t", lt)).speedup;
    const double scaled = speedup(agg("b", "t", bt * c), agg("l", "t", lt * c)).speedup;
    CHECK(scaled == doctest::Approx(plain).epsilon(1e-12));

    // Impacts.
    std::map<Preparator, std::vector<double>> pools, scaled_pools;
    for (const Preparator p : {Preparator::Dedup, Preparator::FillNa, Preparator::Norm}) {
      std::vector<double> pool;
      for (int k = 0; k < 9; ++k) pool.push_back(0.01 + static_cast<double>(rng() % 1000) / 100.0);
      pools[p] = pool;
      for (auto& v : pool) v *= c;
      scaled_pools[p] = pool;
    }
    const auto a = impact(pools);
    const auto b = impact(scaled_pools);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i].impact_pct == doctest::Approx(b[i].impact_pct).epsilon(1e-9));
  }
}

TEST_CASE("impact pools can be scoped per preparator or per engine") {
  std::vector<TimingRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back(rec("fast", "dedup", 1.0));
    records.push_back(rec("slow", "dedup", 100.0));
    records.push_back(rec("fast", "fillna", 2.0));
    records.push_back(rec("slow", "fillna", 2.0));
  }
  const auto joint = impact_from_records(records, {20, 80}, TrimScope::PerPreparator);
  const auto scoped = impact_from_records(records, {20, 80}, TrimScope::PerPreparatorEngine);
  REQUIRE(joint.size() == 2);
  REQUIRE(scoped.size() == 2);
  // Joint trimming can only see the cross-engine pool; both are valid,
  // documented computations and both stages sum to 100.
  CHECK(std::abs(joint[0].impact_pct + joint[1].impact_pct - 100.0) <= 1e-6);
  CHECK(std::abs(scoped[0].impact_pct + scoped[1].impact_pct - 100.0) <= 1e-6);
}

TEST_CASE("empty pools are rejected") {
  CHECK_THROWS_AS(impact({{Preparator::Dedup, {}}}), InvalidArgument);
  CHECK_THROWS_AS(impact({}), EmptyStage);
  CHECK_THROWS_AS(nearest_rank_percentile({}, 50), InvalidArgument);
}
