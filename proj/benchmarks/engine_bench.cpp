#include <benchmark/benchmark.h>

#include "prepbench/adapter.hpp"
#include "prepbench/csv.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/expr.hpp"
#include "prepbench/reference_engine.hpp"

namespace {

using namespace prepbench;

PreparatorCall call(Preparator op, const nlohmann::json& args) {
  return validate_call({op, args});
}

const Table& fixture(std::int64_t rows) {
  static std::map<std::int64_t, Table> cache;
  auto it = cache.find(rows);
  if (it == cache.end()) it = cache.emplace(rows, standard_fixture(rows)).first;
  return it->second;
}

void BM_ReferenceQuery(benchmark::State& state) {
  const Table& t = fixture(state.range(0));
  const auto c = call(Preparator::Query, {{"expr", "qty > 10 and price < 500.0"}});
  for (auto _ : state)
    benchmark::DoNotOptimize(refeng::ref_apply(t, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReferenceQuery)->Arg(1000)->Arg(10000);

void BM_ColumnarQuery(benchmark::State& state) {
  auto adapter = make_columnar_adapter();
  const FrameHandle h = adapter->from_table(fixture(state.range(0)));
  const auto c = call(Preparator::Query, {{"expr", "qty > 10 and price < 500.0"}});
  for (auto _ : state)
    benchmark::DoNotOptimize(adapter->materialize(adapter->apply(h, c)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ColumnarQuery)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ColumnarSort(benchmark::State& state) {
  auto adapter = make_columnar_adapter();
  const FrameHandle h = adapter->from_table(fixture(state.range(0)));
  const auto c = call(Preparator::Sort, {{"by", {"price"}}});
  for (auto _ : state)
    benchmark::DoNotOptimize(adapter->materialize(adapter->apply(h, c)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ColumnarSort)->Arg(10000)->Arg(100000);

void BM_ColumnarGroup(benchmark::State& state) {
  auto adapter = make_columnar_adapter();
  const FrameHandle h = adapter->from_table(fixture(state.range(0)));
  const auto c = call(Preparator::Group,
                      {{"by", {"cat"}},
                       {"aggs", {{"total", {{"col", "price"}, {"fn", "sum"}}},
                                 {"n", {{"col", "id"}, {"fn", "count"}}}}}});
  for (auto _ : state)
    benchmark::DoNotOptimize(adapter->materialize(adapter->apply(h, c)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ColumnarGroup)->Arg(10000)->Arg(100000);

void BM_LazyPlanReplay(benchmark::State& state) {
  auto adapter = make_lazy_adapter();
  const FrameHandle base = adapter->from_table(fixture(state.range(0)));
  const auto q1 = call(Preparator::Query, {{"expr", "qty > 3"}});
  const auto q2 = call(Preparator::Query, {{"expr", "price < 900.0"}});
  const auto n = call(Preparator::Norm, {{"column", "price"}});
  for (auto _ : state) {
    FrameHandle h = adapter->apply(base, q1);
    h = adapter->apply(h, q2);
    h = adapter->apply(h, n);
    benchmark::DoNotOptimize(adapter->materialize(h));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LazyPlanReplay)->Arg(10000)->Arg(100000);

void BM_CsvRead(benchmark::State& state) {
  const auto dir = std::filesystem::temp_directory_path() / "prepbench-bench";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bench.csv";
  write_csv(fixture(state.range(0)), path);
  for (auto _ : state)
    benchmark::DoNotOptimize(read_csv(path));
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(std::filesystem::file_size(path)));
}
BENCHMARK(BM_CsvRead)->Arg(10000)->Arg(100000);

void BM_ExprEval(benchmark::State& state) {
  const Table& t = fixture(1000);
  const expr::Compiled ex("qty * price + if(flag, 1.0, 0.0)", t.schema());
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ex.eval(t.row(i++ % t.row_count())));
  }
}
BENCHMARK(BM_ExprEval);

}  // namespace

BENCHMARK_MAIN();
