#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "prepbench/errors.hpp"
#include "prepbench/reference_engine.hpp"

using namespace prepbench;
using refeng::ref_apply;

namespace {

PreparatorCall call(Preparator op, const nlohmann::json& args = nlohmann::json::object()) {
  return validate_call({op, args});
}

Table result_of(const Table& t, Preparator op, const nlohmann::json& args = {}) {
  return result_table(ref_apply(t, call(op, args.is_null() ? nlohmann::json::object() : args)));
}

Table kv_table(std::initializer_list<std::pair<std::string, std::int64_t>> rows) {
  Table t({{"k", DataType::String}, {"v", DataType::Int}});
  for (const auto& [k, v] : rows) t.rows().push_back({k, v});
  return t;
}

}  // namespace

TEST_CASE("group by key with sum") {
  const Table t = kv_table({{"a", 1}, {"a", 2}, {"b", 3}});
  const Table g = result_of(t, Preparator::Group,
                            {{"by", {"k"}}, {"aggs", {{"total", {{"col", "v"}, {"fn", "sum"}}}}}});
  REQUIRE(g.row_count() == 2);
  CHECK(g.at(0, 0) == Value{std::string("a")});
  CHECK(g.at(0, 1) == Value{std::int64_t{3}});
  CHECK(g.at(1, 0) == Value{std::string("b")});
  CHECK(g.at(1, 1) == Value{std::int64_t{3}});
}

TEST_CASE("inner join of single-row tables") {
  Table left({{"k", DataType::Int}, {"x", DataType::String}});
  left.rows().push_back({std::int64_t{1}, std::string("x")});
  Table right({{"k", DataType::Int}, {"y", DataType::String}});
  right.rows().push_back({std::int64_t{1}, std::string("y")});
  const Table j = refeng::ref_join(left, right, call(Preparator::Join, {{"other", "right"}, {"on", {"k"}}}));
  REQUIRE(j.row_count() == 1);
  REQUIRE(j.column_count() == 3);
  CHECK(j.at(0, 0) == Value{std::int64_t{1}});
  CHECK(j.at(0, 1) == Value{std::string("x")});
  CHECK(j.at(0, 2) == Value{std::string("y")});
}

namespace {

// Independent quantile oracle: nearest pair by index arithmetic, written
// without reusing the implementation's helper.
double brute_quantile(std::vector<double> vals, double q) {
  std::sort(vals.begin(), vals.end());
  const double pos = q * (static_cast<double>(vals.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= vals.size()) return vals.back();
  return vals[lo] * (1.0 - (pos - static_cast<double>(lo))) +
         vals[lo + 1] * (pos - static_cast<double>(lo));
}

}  // namespace

TEST_CASE("outlier flags exactly the planted extreme row") {
  Table t({{"v", DataType::Float}});
  std::vector<double> vals;
  for (int i = 1; i <= 100; ++i) {
    t.rows().push_back({static_cast<double>(i)});
    vals.push_back(i);
  }
  t.rows().push_back({1000.0});
  vals.push_back(1000.0);

  // Brute-force fences computed independently.
  const double q1 = brute_quantile(vals, 0.25);
  const double q3 = brute_quantile(vals, 0.75);
  const double lo = q1 - 1.5 * (q3 - q1);
  const double hi = q3 + 1.5 * (q3 - q1);
  std::size_t expected = 0;
  for (const double v : vals) expected += (v < lo || v > hi);
  REQUIRE(expected == 1);

  const Table flagged = result_of(t, Preparator::Outlier, {{"column", "v"}});
  REQUIRE(flagged.row_count() == 1);
  CHECK(flagged.at(0, 0) == Value{1000.0});

  const auto [flo, fhi] = refeng::outlier_fences(t, "v", 0.25, 0.75, 1.5);
  CHECK(flo == doctest::Approx(lo).epsilon(1e-12));
  CHECK(fhi == doctest::Approx(hi).epsilon(1e-12));
}

TEST_CASE("pivot matches a nested-loop oracle on a random fixture") {
  std::mt19937_64 rng(17);
  Table t({{"i", DataType::String}, {"c", DataType::String}, {"v", DataType::Int}});
  const char* is[] = {"p", "q", "r"};
  const char* cs[] = {"x", "y"};
  for (int n = 0; n < 50; ++n)
    t.rows().push_back({std::string(is[rng() % 3]), std::string(cs[rng() % 2]),
                        static_cast<std::int64_t>(rng() % 100)});

  const Table p = refeng::ref_pivot(t, "i", "c", "v", "sum");

  // Independent nested-loop aggregation.
  for (std::size_t r = 0; r < p.row_count(); ++r) {
    const std::string idx = std::get<std::string>(p.at(r, 0));
    for (std::size_t c = 1; c < p.column_count(); ++c) {
      const std::string col = p.schema()[c].name;
      std::int64_t sum = 0;
      bool any = false;
      for (const auto& row : t.rows()) {
        if (std::get<std::string>(row[0]) == idx && std::get<std::string>(row[1]) == col) {
          sum += std::get<std::int64_t>(row[2]);
          any = true;
        }
      }
      if (any) CHECK(p.at(r, c) == Value{sum});
      else CHECK(is_null(p.at(r, c)));
    }
  }
}

TEST_CASE("pivot shapes: full grid and missing combinations") {
  Table t({{"i", DataType::String}, {"c", DataType::String}, {"v", DataType::Int}});
  t.rows().push_back({std::string("a"), std::string("x"), std::int64_t{1}});
  t.rows().push_back({std::string("a"), std::string("y"), std::int64_t{2}});
  t.rows().push_back({std::string("b"), std::string("x"), std::int64_t{3}});
  t.rows().push_back({std::string("b"), std::string("y"), std::int64_t{4}});
  const Table full = refeng::ref_pivot(t, "i", "c", "v", "sum");
  CHECK(full.row_count() == 2);
  CHECK(full.column_count() == 3);

  Table single({{"i", DataType::String}, {"c", DataType::String}, {"v", DataType::Int}});
  single.rows().push_back({std::string("a"), std::string("x"), std::int64_t{1}});
  single.rows().push_back({std::string("b"), std::string("y"), std::int64_t{2}});
  const Table sparse = refeng::ref_pivot(single, "i", "c", "v", "sum");
  REQUIRE(sparse.row_count() == 2);
  REQUIRE(sparse.column_count() == 3);
  CHECK(is_null(sparse.at(0, 2)));  // (a, y) missing
  CHECK(is_null(sparse.at(1, 1)));  // (b, x) missing

  CHECK_THROWS_AS(refeng::ref_pivot(t, "i", "c", "i", "sum"), TypeMismatch);
}

TEST_CASE("dropna conserves the row multiset") {
  std::mt19937_64 rng(23);
  Table t({{"a", DataType::Int}, {"b", DataType::String}});
  for (int i = 0; i < 200; ++i) {
    t.rows().push_back({rng() % 5 == 0 ? Value{} : Value{static_cast<std::int64_t>(rng() % 50)},
                        rng() % 5 == 0 ? Value{} : Value{std::string(1, static_cast<char>('a' + rng() % 4))}});
  }
  const Table kept = result_of(t, Preparator::DropNa);
  Table removed(t.schema());
  for (const auto& row : t.rows())
    if (is_null(row[0]) || is_null(row[1])) removed.rows().push_back(row);
  Table reunion(t.schema());
  for (const auto& row : kept.rows()) reunion.rows().push_back(row);
  for (const auto& row : removed.rows()) reunion.rows().push_back(row);
  CHECK(compare_tables(t, reunion, {.ordered = false, .rel_tol = 0.0}).equal);

  const Table all_mode = result_of(t, Preparator::DropNa, {{"how", "all"}});
  for (const auto& row : all_mode.rows()) CHECK((!is_null(row[0]) || !is_null(row[1])));
}

TEST_CASE("dedup keeps first occurrences and leaves no duplicates") {
  Table t({{"a", DataType::Int}, {"b", DataType::String}});
  t.rows().push_back({std::int64_t{1}, std::string("x")});
  t.rows().push_back({std::int64_t{2}, std::string("y")});
  t.rows().push_back({std::int64_t{1}, std::string("x")});
  t.rows().push_back({Value{}, std::string("z")});
  t.rows().push_back({Value{}, std::string("z")});  // null == null for dedup
  const Table d = result_of(t, Preparator::Dedup);
  REQUIRE(d.row_count() == 3);
  CHECK(d.at(0, 0) == Value{std::int64_t{1}});
  CHECK(d.at(1, 0) == Value{std::int64_t{2}});
  CHECK(is_null(d.at(2, 0)));

  // Projection-scoped duplicates.
  const Table by_b = result_of(t, Preparator::Dedup, {{"columns", {"b"}}});
  CHECK(by_b.row_count() == 3);  // x, y, z
}

TEST_CASE("norm maps to the unit interval and hits both bounds") {
  Table t({{"v", DataType::Int}});
  for (const std::int64_t v : {0, 5, 10}) t.rows().push_back({v});
  const Table n = result_of(t, Preparator::Norm, {{"column", "v"}});
  CHECK(n.at(0, 0) == Value{0.0});
  CHECK(n.at(1, 0) == Value{0.5});
  CHECK(n.at(2, 0) == Value{1.0});

  std::mt19937_64 rng(31);
  Table r({{"v", DataType::Float}});
  for (int i = 0; i < 100; ++i)
    r.rows().push_back({static_cast<double>(rng() % 1000) - 500.0});
  const Table rn = result_of(r, Preparator::Norm, {{"column", "v"}});
  double lo = 2, hi = -1;
  for (const auto& row : rn.rows()) {
    const double v = std::get<double>(row[0]);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo == 0.0);
  CHECK(hi == 1.0);

  Table constant({{"v", DataType::Int}});
  constant.rows().push_back({std::int64_t{7}});
  constant.rows().push_back({std::int64_t{7}});
  const Table cn = result_of(constant, Preparator::Norm, {{"column", "v"}});
  CHECK(cn.at(0, 0) == Value{0.0});
}

TEST_CASE("stats reports count, mean, sample std and exact quartiles") {
  Table t({{"v", DataType::Int}});
  for (const std::int64_t v : {1, 2, 3, 4, 5}) t.rows().push_back({v});
  t.rows().push_back({Value{}});
  const auto r = ref_apply(t, call(Preparator::Stats));
  const Table& s = std::get<ScalarResult>(r).values;
  REQUIRE(s.row_count() == 1);
  CHECK(s.at(0, 1) == Value{std::int64_t{5}});            // count skips nulls
  CHECK(s.at(0, 2) == Value{3.0});                        // mean
  CHECK(std::get<double>(s.at(0, 3)) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-12));  // std, n-1 denominator
  CHECK(s.at(0, 4) == Value{1.0});                        // min
  CHECK(s.at(0, 5) == Value{2.0});                        // q25
  CHECK(s.at(0, 6) == Value{3.0});                        // q50
  CHECK(s.at(0, 7) == Value{4.0});                        // q75
  CHECK(s.at(0, 8) == Value{5.0});                        // max
}

TEST_CASE("summary shapes for getcols, dtypes and isna") {
  Table t({{"a", DataType::Int}, {"b", DataType::String}});
  t.rows().push_back({std::int64_t{1}, Value{}});
  const Table cols = result_table(ref_apply(t, call(Preparator::GetCols)));
  CHECK(cols.row_count() == 2);
  CHECK(cols.at(0, 0) == Value{std::string("a")});
  const Table types = result_table(ref_apply(t, call(Preparator::DTypes)));
  CHECK(types.at(1, 1) == Value{std::string("string")});
  const Table nulls = result_table(ref_apply(t, call(Preparator::IsNa)));
  CHECK(nulls.at(0, 1) == Value{std::int64_t{0}});
  CHECK(nulls.at(1, 1) == Value{std::int64_t{1}});
}

TEST_CASE("fillna strategies") {
  Table t({{"v", DataType::Int}, {"s", DataType::String}});
  t.rows().push_back({std::int64_t{1}, std::string("a")});
  t.rows().push_back({Value{}, Value{}});
  t.rows().push_back({std::int64_t{3}, std::string("a")});
  t.rows().push_back({std::int64_t{3}, std::string("b")});

  const Table mean = result_of(t, Preparator::FillNa, {{"columns", {"v"}}, {"strategy", "mean"}});
  CHECK(mean.schema()[0].type == DataType::Float);  // int column promotes
  CHECK(std::get<double>(mean.at(1, 0)) == doctest::Approx(7.0 / 3.0));

  const Table median = result_of(t, Preparator::FillNa, {{"columns", {"v"}}, {"strategy", "median"}});
  CHECK(median.at(1, 0) == Value{3.0});

  const Table mode = result_of(t, Preparator::FillNa, {{"columns", {"s"}}, {"strategy", "mode"}});
  CHECK(mode.at(1, 1) == Value{std::string("a")});

  const Table fwd = result_of(t, Preparator::FillNa, {{"strategy", "forward"}});
  CHECK(fwd.at(1, 0) == Value{std::int64_t{1}});
  CHECK(fwd.at(1, 1) == Value{std::string("a")});

  const Table constant =
      result_of(t, Preparator::FillNa, {{"columns", {"v"}}, {"strategy", "constant"}, {"value", 9}});
  CHECK(constant.at(1, 0) == Value{std::int64_t{9}});

  // Mode ties resolve to the smallest value.
  Table tie({{"s", DataType::String}});
  tie.rows().push_back({std::string("b")});
  tie.rows().push_back({std::string("a")});
  tie.rows().push_back({Value{}});
  const Table tied = result_of(tie, Preparator::FillNa, {{"strategy", "mode"}});
  CHECK(tied.at(2, 0) == Value{std::string("a")});
}

TEST_CASE("sort is stable with nulls last in both directions") {
  Table t({{"k", DataType::Int}, {"tag", DataType::String}});
  t.rows().push_back({std::int64_t{2}, std::string("first2")});
  t.rows().push_back({Value{}, std::string("null1")});
  t.rows().push_back({std::int64_t{1}, std::string("one")});
  t.rows().push_back({std::int64_t{2}, std::string("second2")});

  const Table asc = result_of(t, Preparator::Sort, {{"by", {"k"}}});
  CHECK(asc.at(0, 0) == Value{std::int64_t{1}});
  CHECK(asc.at(1, 1) == Value{std::string("first2")});   // stability
  CHECK(asc.at(2, 1) == Value{std::string("second2")});
  CHECK(is_null(asc.at(3, 0)));                          // nulls last

  const Table desc = result_of(t, Preparator::Sort, {{"by", {"k"}}, {"ascending", false}});
  CHECK(desc.at(0, 0) == Value{std::int64_t{2}});
  CHECK(is_null(desc.at(3, 0)));  // still last
}

TEST_CASE("setcase title follows word boundaries") {
  Table t({{"s", DataType::String}});
  t.rows().push_back({std::string("hello world-of data")});
  t.rows().push_back({std::string("a")});
  t.rows().push_back({std::string("B")});
  const Table upper = result_of(t, Preparator::SetCase, {{"columns", {"s"}}, {"mode", "upper"}});
  CHECK(upper.at(1, 0) == Value{std::string("A")});
  CHECK(upper.at(2, 0) == Value{std::string("B")});
  const Table title = result_of(t, Preparator::SetCase, {{"columns", {"s"}}, {"mode", "title"}});
  CHECK(title.at(0, 0) == Value{std::string("Hello World-Of Data")});
}

TEST_CASE("chdate parses explicit formats and reformats") {
  Table t({{"d", DataType::String}});
  t.rows().push_back({std::string("14/03/2015")});
  t.rows().push_back({Value{}});
  const Table parsed = result_of(t, Preparator::ChDate, {{"column", "d"}, {"from_format", "%d/%m/%Y"}});
  CHECK(parsed.schema()[0].type == DataType::Datetime);
  CHECK(parsed.at(0, 0) == Value{make_date(2015, 3, 14)});
  CHECK(is_null(parsed.at(1, 0)));

  const Table reformatted = result_of(
      t, Preparator::ChDate, {{"column", "d"}, {"from_format", "%d/%m/%Y"}, {"to_format", "%Y-%m"}});
  CHECK(reformatted.schema()[0].type == DataType::String);
  CHECK(reformatted.at(0, 0) == Value{std::string("2015-03")});

  Table bad({{"d", DataType::String}});
  bad.rows().push_back({std::string("not a date")});
  CHECK_THROWS_AS(result_of(bad, Preparator::ChDate, {{"column", "d"}, {"from_format", "%Y-%m-%d"}}),
                  InvalidArgument);
}

TEST_CASE("onehot and catenc are deterministic over value order") {
  Table t({{"c", DataType::String}, {"v", DataType::Int}});
  t.rows().push_back({std::string("red"), std::int64_t{1}});
  t.rows().push_back({std::string("blue"), std::int64_t{2}});
  t.rows().push_back({Value{}, std::int64_t{3}});
  t.rows().push_back({std::string("red"), std::int64_t{4}});

  const Table hot = result_of(t, Preparator::OneHot, {{"columns", {"c"}}});
  REQUIRE(hot.column_count() == 3);  // v, c=blue, c=red (lexicographic)
  CHECK(hot.schema()[1].name == "c=blue");
  CHECK(hot.schema()[2].name == "c=red");
  CHECK(hot.at(0, 2) == Value{std::int64_t{1}});
  CHECK(hot.at(2, 1) == Value{std::int64_t{0}});  // null row: all zeros
  CHECK(hot.at(2, 2) == Value{std::int64_t{0}});

  const Table enc = result_of(t, Preparator::CatEnc, {{"columns", {"c"}}});
  CHECK(enc.schema()[0].type == DataType::Int);
  CHECK(enc.at(0, 0) == Value{std::int64_t{1}});  // red > blue lexicographically
  CHECK(enc.at(1, 0) == Value{std::int64_t{0}});
  CHECK(is_null(enc.at(2, 0)));
}

TEST_CASE("edit and replace distinguish positional and value semantics") {
  Table t = kv_table({{"a", 1}, {"b", 1}, {"c", 2}});
  const Table edited = result_of(t, Preparator::Edit, {{"row", 1}, {"column", "v"}, {"value", 9}});
  CHECK(edited.at(1, 1) == Value{std::int64_t{9}});
  CHECK(edited.at(0, 1) == Value{std::int64_t{1}});  // only the addressed cell

  const Table replaced = result_of(t, Preparator::Replace, {{"columns", {"v"}}, {"old", 1}, {"new", 7}});
  CHECK(replaced.at(0, 1) == Value{std::int64_t{7}});
  CHECK(replaced.at(1, 1) == Value{std::int64_t{7}});  // every occurrence
  CHECK(replaced.at(2, 1) == Value{std::int64_t{2}});

  CHECK_THROWS_AS(result_of(t, Preparator::Edit, {{"row", 99}, {"column", "v"}, {"value", 0}}),
                  InvalidArgument);
}

TEST_CASE("error paths name the offender") {
  Table t = kv_table({{"a", 1}});
  CHECK_THROWS_AS(result_of(t, Preparator::Drop, {{"columns", {"nope"}}}), ColumnNotFound);
  CHECK_THROWS_AS(result_of(t, Preparator::SrchPtn, {{"column", "v"}, {"pattern", "x"}}),
                  TypeMismatch);
  CHECK_THROWS_AS(result_of(t, Preparator::Norm, {{"column", "k"}}), TypeMismatch);
  CHECK_THROWS_AS(result_of(t, Preparator::SetCase, {{"columns", {"v"}}, {"mode", "upper"}}),
                  TypeMismatch);
  CHECK_THROWS_AS(
      result_of(t, Preparator::Group,
                {{"by", {"k"}}, {"aggs", {{"s", {{"col", "k"}, {"fn", "sum"}}}}}}),
      TypeMismatch);
}

TEST_CASE("ref_apply is pure and composition equals folding") {
  Table t = kv_table({{"b", 2}, {"a", 1}, {"c", 3}});
  const Table before = t;
  const Table sorted = result_of(t, Preparator::Sort, {{"by", {"k"}}});
  CHECK(t == before);  // input untouched
  CHECK(result_of(t, Preparator::Sort, {{"by", {"k"}}}) == sorted);  // deterministic

  // Folding steps one at a time equals running them as a pipeline.
  Table step = result_of(t, Preparator::Query, {{"expr", "v >= 2"}});
  step = result_of(step, Preparator::Sort, {{"by", {"v"}}, {"ascending", false}});
  step = result_of(step, Preparator::Rename, {{"columns", {{"v", "value"}}}});

  PipelineSpec spec;
  spec.name = "fold";
  spec.dataset = {"unused.csv", "csv"};
  spec.steps = {call(Preparator::Read),
                call(Preparator::Query, {{"expr", "v >= 2"}}),
                call(Preparator::Sort, {{"by", {"v"}}, {"ascending", false}}),
                call(Preparator::Rename, {{"columns", {{"v", "value"}}}})};
  // Run without the read step by folding manually from the same base.
  Table folded = t;
  for (std::size_t i = 1; i < spec.steps.size(); ++i)
    folded = result_table(ref_apply(folded, spec.steps[i]));
  CHECK(folded == step);
}

TEST_CASE("observational EDA steps leave pipeline state unchanged") {
  CHECK_FALSE(refeng::threads_state(Preparator::IsNa));
  CHECK_FALSE(refeng::threads_state(Preparator::Stats));
  CHECK_FALSE(refeng::threads_state(Preparator::Outlier));
  CHECK_FALSE(refeng::threads_state(Preparator::SrchPtn));
  CHECK(refeng::threads_state(Preparator::Query));
  CHECK(refeng::threads_state(Preparator::Sort));
  CHECK(refeng::threads_state(Preparator::Dedup));
}
