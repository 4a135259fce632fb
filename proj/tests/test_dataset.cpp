#include <doctest.h>

#include <fstream>

#include "prepbench/csv.hpp"
#include "prepbench/dataset.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/parquet.hpp"
#include "prepbench/reference_engine.hpp"
#include "support/test_adapters.hpp"

using namespace prepbench;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("a 2x2 fixture with one null cell profiles at 25 percent") {
  const auto dir = testing::scratch_dir("profile-2x2");
  std::ofstream(dir / "t.csv") << "a,b\n1,x\n,y\n";
  const auto p = profile(dir / "t.csv", "csv");
  CHECK(p.rows == 2);
  CHECK(p.columns == 2);
  CHECK(p.null_pct == 25.0);
  CHECK(p.numeric_cols == 1);
  CHECK(p.string_cols == 1);
  CHECK(p.boolean_cols == 0);
  REQUIRE(p.str_len_range.has_value());
  CHECK(p.str_len_range->first == 1);
  CHECK(p.str_len_range->second == 1);
  CHECK(p.file_size_bytes == static_cast<std::int64_t>(std::filesystem::file_size(dir / "t.csv")));
}

TEST_CASE("profile is pure") {
  const auto dir = testing::scratch_dir("profile-pure");
  FixtureSpec spec;
  spec.rows = 200;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string,d:bool");
  spec.null_density = 0.05;
  make_fixture(spec, dir / "f.csv");
  const auto p1 = profile(dir / "f.csv", "csv");
  const auto p2 = profile(dir / "f.csv", "csv");
  CHECK(p1 == p2);
}

TEST_CASE("fixtures realize the requested parameters exactly") {
  const auto dir = testing::scratch_dir("fixture-exact");
  FixtureSpec spec;
  spec.rows = 1000;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string,d:bool,e:datetime");
  spec.null_density = 0.1;
  spec.str_len_min = 2;
  spec.str_len_max = 24;
  spec.seed = 77;
  make_fixture(spec, dir / "f.csv");
  const auto p = profile(dir / "f.csv", "csv");
  CHECK(p.rows == 1000);
  CHECK(p.columns == 5);
  CHECK(p.numeric_cols == 2);
  CHECK(p.string_cols == 1);
  CHECK(p.boolean_cols == 1);
  CHECK(p.datetime_cols == 1);
  CHECK(p.null_pct == doctest::Approx(10.0).epsilon(1e-9));  // exact null placement
  REQUIRE(p.str_len_range.has_value());
  CHECK(p.str_len_range->first == 2);
  CHECK(p.str_len_range->second == 24);
}

TEST_CASE("single-row all-numeric fixture has no string length range") {
  const Table t = make_fixture_table({1, parse_fixture_schema("a:int,b:float"), 0, 0, 1, 16, 5, "csv"});
  CHECK(t.row_count() == 1);
  const auto dir = testing::scratch_dir("fixture-degenerate");
  write_csv(t, dir / "one.csv");
  const auto p = profile(dir / "one.csv", "csv");
  CHECK(p.rows == 1);
  CHECK_FALSE(p.str_len_range.has_value());
  CHECK(p.string_cols == 0);
}

TEST_CASE("duplicate density shows up in reference-engine dedup counts") {
  FixtureSpec spec;
  spec.rows = 100;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string");
  spec.duplicate_density = 0.5;
  spec.seed = 11;
  const Table t = make_fixture_table(spec);
  const Table d = result_table(refeng::ref_apply(t, validate_call({Preparator::Dedup, {}})));
  CHECK(t.row_count() - d.row_count() == 50);  // exactly round(0.5 * 100) copies
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  const auto dir = testing::scratch_dir("sample-determinism");
  FixtureSpec spec;
  spec.rows = 1000;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string");
  spec.seed = 42;
  make_fixture(spec, dir / "src.csv");

  SampleSpec s;
  s.fraction = 15;
  s.seed = 7;
  const auto p1 = sample(dir / "src.csv", "csv", s, dir / "s1.csv");
  const auto p2 = sample(dir / "src.csv", "csv", s, dir / "s2.csv");
  CHECK(p1.rows == 150);  // round(15% of 1000)
  CHECK(slurp(dir / "s1.csv") == slurp(dir / "s2.csv"));  // byte-identical

  SampleSpec other = s;
  other.seed = 8;
  sample(dir / "src.csv", "csv", other, dir / "s3.csv");
  CHECK(slurp(dir / "s1.csv") != slurp(dir / "s3.csv"));
}

TEST_CASE("sampling at 100 percent is the identity on row count") {
  const auto dir = testing::scratch_dir("sample-identity");
  FixtureSpec spec;
  spec.rows = 321;
  spec.columns = parse_fixture_schema("a:int,b:string");
  make_fixture(spec, dir / "src.csv");
  for (const char* method : {"random-uniform", "head"}) {
    SampleSpec s;
    s.fraction = 100;
    s.method = method;
    const auto p = sample(dir / "src.csv", "csv", s, dir / "full.csv");
    CHECK(p.rows == 321);
  }
}

TEST_CASE("sample row counts are monotone in the fraction") {
  const auto dir = testing::scratch_dir("sample-monotone");
  FixtureSpec spec;
  spec.rows = 500;
  spec.columns = parse_fixture_schema("a:int");
  make_fixture(spec, dir / "src.csv");
  std::int64_t last = -1;
  for (const double f : {1.0, 5.0, 15.0, 25.0, 50.0, 75.0, 100.0}) {
    SampleSpec s;
    s.fraction = f;
    const auto p = sample(dir / "src.csv", "csv", s, dir / "out.csv");
    CHECK(p.rows == std::llround(f / 100.0 * 500));
    CHECK(p.rows >= last);
    last = p.rows;
  }
  SampleSpec bad;
  bad.fraction = 0;
  CHECK_THROWS_AS(sample(dir / "src.csv", "csv", bad, dir / "out.csv"), InvalidArgument);
}

TEST_CASE("head sampling takes a prefix") {
  const auto dir = testing::scratch_dir("sample-head");
  std::ofstream(dir / "src.csv") << "a\n1\n2\n3\n4\n5\n6\n7\n8\n9\n10\n";
  SampleSpec s;
  s.fraction = 30;
  s.method = "head";
  sample(dir / "src.csv", "csv", s, dir / "head.csv");
  const Table t = read_csv(dir / "head.csv");
  REQUIRE(t.row_count() == 3);
  CHECK(t.at(0, 0) == Value{std::int64_t{1}});
  CHECK(t.at(2, 0) == Value{std::int64_t{3}});
}

TEST_CASE("parquet datasets profile and sample through the same interface") {
  const auto dir = testing::scratch_dir("dataset-parquet");
  FixtureSpec spec;
  spec.rows = 400;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string");
  spec.null_density = 0.05;
  spec.format = "parquet";
  make_fixture(spec, dir / "f.parquet");
  const auto p = profile(dir / "f.parquet", "parquet");
  CHECK(p.rows == 400);
  CHECK(p.null_pct == doctest::Approx(5.0).epsilon(1e-9));
  SampleSpec s;
  s.fraction = 25;
  const auto sp = sample(dir / "f.parquet", "parquet", s, dir / "s.parquet");
  CHECK(sp.rows == 100);
  CHECK(parquet_row_count(dir / "s.parquet") == 100);
}

TEST_CASE("fixtures are reproducible by seed") {
  FixtureSpec spec;
  spec.rows = 100;
  spec.columns = parse_fixture_schema("a:int,b:float,c:string,d:datetime");
  spec.null_density = 0.07;
  spec.seed = 99;
  const Table a = make_fixture_table(spec);
  const Table b = make_fixture_table(spec);
  CHECK(a == b);
  spec.seed = 100;
  CHECK(make_fixture_table(spec) != a);
}

// Profiles of the paper's Kaggle datasets are network-dependent; this check
// only runs when PREPBENCH_PAPER_DATA points at a directory holding them.
TEST_CASE("paper dataset profiles (optional, needs downloaded data)") {
  const char* root = std::getenv("PREPBENCH_PAPER_DATA");
  if (!root) {
    MESSAGE("PREPBENCH_PAPER_DATA not set; skipping Loan/Taxi profile checks");
    return;
  }
  const auto loan = std::filesystem::path(root) / "loan.csv";
  if (std::filesystem::exists(loan)) {
    const auto p = profile(loan, "csv");
    CHECK(p.rows == doctest::Approx(2e6).epsilon(0.05));
    CHECK(p.columns == 151);
    CHECK(p.null_pct == doctest::Approx(31.0).epsilon(0.05));
  }
  const auto taxi = std::filesystem::path(root) / "taxi.csv";
  if (std::filesystem::exists(taxi)) {
    const auto p = profile(taxi, "csv");
    CHECK(p.rows == doctest::Approx(77e6).epsilon(0.05));
    CHECK(p.columns == 18);
    CHECK(p.null_pct == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(p.numeric_cols == 15);
    CHECK(p.string_cols == 3);
    CHECK(p.boolean_cols == 0);
  }
}
