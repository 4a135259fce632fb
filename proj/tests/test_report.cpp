#include <doctest.h>

#include <fstream>

#include "prepbench/errors.hpp"
#include "prepbench/executor.hpp"
#include "prepbench/report.hpp"
#include "support/test_adapters.hpp"

using namespace prepbench;
using report::ReportKind;
using report::ReportSpec;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void emit(const std::filesystem::path& root, const std::string& engine,
          const std::string& pipeline, Mode mode, const std::string& target, double secs) {
  const auto dir = results_dir(root, engine, pipeline, mode);
  std::filesystem::create_directories(dir);
  TimingRecord r;
  r.engine = engine;
  r.pipeline = pipeline;
  r.target = target;
  r.mode = mode;
  r.status = RunStatus::OK;
  r.wall_time = secs;
  append_record(dir / "records.jsonl", r);
}

std::filesystem::path synthetic_results() {
  const auto root = testing::scratch_dir("report-results");
  for (int i = 0; i < 3; ++i) {
    // Baseline twice as slow on sort, equal on dedup.
    emit(root, "columnar", "p", Mode::FunctionCore, "sort", 10.0 + i * 0.0);
    emit(root, "lazycol", "p", Mode::FunctionCore, "sort", 5.0);
    emit(root, "columnar", "p", Mode::FunctionCore, "dedup", 4.0);
    emit(root, "lazycol", "p", Mode::FunctionCore, "dedup", 4.0);
    emit(root, "columnar", "p", Mode::PipelineStage, "EDA", 8.0);
    emit(root, "lazycol", "p", Mode::PipelineStage, "EDA", 2.0);
    emit(root, "columnar", "p", Mode::PipelineStage, "DC", 6.0);
    emit(root, "lazycol", "p", Mode::PipelineStage, "DC", 3.0);
    emit(root, "columnar", "p", Mode::PipelineFull, "FULL", 12.0);
    emit(root, "lazycol", "p", Mode::PipelineFull, "FULL", 6.0);
    emit(root, "columnar", "p", Mode::FunctionCore, "read", 1.0);
    emit(root, "lazycol", "p", Mode::FunctionCore, "read", 0.5);
    emit(root, "columnar", "p", Mode::FunctionCore, "write", 2.0);
    emit(root, "lazycol", "p", Mode::FunctionCore, "write", 1.0);
  }
  return root;
}

}  // namespace

TEST_CASE("speedup_by_stage emits the ratio table and a figure with csv sibling") {
  const auto root = synthetic_results();
  const auto out = testing::scratch_dir("report-out");
  ReportSpec spec;
  spec.kind = ReportKind::SpeedupByStage;
  spec.inputs = {root};
  spec.output = out / "stage.svg";
  spec.format = "svg";
  spec.baseline_engine = "columnar";
  const auto path = report::render(spec);
  CHECK(std::filesystem::exists(path));
  CHECK(std::filesystem::exists(out / "stage.svg.csv"));
  const std::string csv = slurp(out / "stage.svg.csv");
  CHECK(csv.find("EDA,lazycol,4") != std::string::npos);
  CHECK(csv.find("DC,lazycol,2") != std::string::npos);
  const std::string svg = slurp(path);
  CHECK(svg.find("<svg") != std::string::npos);
}

TEST_CASE("rendering is deterministic for identical inputs") {
  const auto root = synthetic_results();
  const auto out = testing::scratch_dir("report-det");
  for (const char* format : {"svg", "png", "csv", "md"}) {
    ReportSpec spec;
    spec.kind = ReportKind::SpeedupByPreparator;
    spec.inputs = {root};
    spec.format = format;
    spec.output = out / ("a." + std::string(format));
    report::render(spec);
    spec.output = out / ("b." + std::string(format));
    report::render(spec);
    CHECK(slurp(out / ("a." + std::string(format))) == slurp(out / ("b." + std::string(format))));
  }
  // PNG carries the magic bytes.
  const std::string png = slurp(out / "a.png");
  REQUIRE(png.size() > 8);
  CHECK(static_cast<unsigned char>(png[0]) == 0x89);
  CHECK(png.compare(1, 3, "PNG") == 0);
}

TEST_CASE("empty results directories raise IncompleteResults") {
  const auto empty = testing::scratch_dir("report-empty");
  ReportSpec spec;
  spec.kind = ReportKind::SpeedupByStage;
  spec.inputs = {empty};
  spec.output = empty / "x.svg";
  CHECK_THROWS_AS(report::render(spec), IncompleteResults);
}

TEST_CASE("eager_vs_lazy reports the forced-versus-full comparison") {
  const auto root = synthetic_results();
  const auto out = testing::scratch_dir("report-evl");
  ReportSpec spec;
  spec.kind = ReportKind::EagerVsLazy;
  spec.inputs = {root};
  spec.output = out / "evl.csv";
  spec.format = "csv";
  report::render(spec);
  const std::string csv = slurp(out / "evl.csv");
  // lazycol: forced total = 0.5 + 5 + 4 + 1 = 10.5; full = 6 -> ~42.9% better.
  CHECK(csv.find("lazycol,10.5,6,42.857") != std::string::npos);
}

TEST_CASE("min_config_matrix cells stay in the legend") {
  const auto dir = testing::scratch_dir("report-matrix");
  nlohmann::json sweep = nlohmann::json::array();
  const char* configs[] = {"laptop", "workstation", "server", "x"};
  int i = 0;
  for (const char* engine : {"a", "b"})
    for (const double f : {25.0, 50.0}) {
      nlohmann::json cell{{"engine", engine},
                          {"dataset", "d"},
                          {"sample_fraction", f},
                          {"config", configs[i++ % 4]},
                          {"status", i % 4 == 3 ? "OOM" : "OK"}};
      sweep.push_back(cell);
    }
  std::ofstream(dir / "sweep.json") << sweep.dump();

  ReportSpec spec;
  spec.kind = ReportKind::MinConfigMatrix;
  spec.inputs = {dir / "sweep.json"};
  spec.output = dir / "matrix.md";
  spec.format = "md";
  report::render(spec);
  const std::string md = slurp(dir / "matrix.md");
  CHECK(md.find("| a |") != std::string::npos);
  CHECK(md.find("laptop") != std::string::npos);
  CHECK(md.find("x") != std::string::npos);

  spec.format = "svg";
  spec.output = dir / "matrix.svg";
  report::render(spec);
  CHECK(std::filesystem::exists(dir / "matrix.svg.csv"));

  // A missing cell is an incomplete sweep.
  sweep.erase(1);
  std::ofstream(dir / "partial.json") << sweep.dump();
  spec.inputs = {dir / "partial.json"};
  spec.output = dir / "partial.svg";
  CHECK_THROWS_AS(report::render(spec), IncompleteResults);
}

TEST_CASE("compatibility matrix covers all 27 preparators per engine") {
  register_builtin_adapters();
  const auto dir = testing::scratch_dir("report-compat");
  ReportSpec spec;
  spec.kind = ReportKind::CompatibilityMatrix;
  spec.output = dir / "compat.csv";
  spec.format = "csv";
  spec.exclude_engines = {};
  report::render(spec);
  const std::string csv = slurp(dir / "compat.csv");
  std::size_t lines = 0;
  for (const char c : csv) lines += c == '\n';
  CHECK(lines == 28);  // header + 27 rows
  CHECK(csv.find("reference") != std::string::npos);
  CHECK(csv.find("full") != std::string::npos);
}

TEST_CASE("tpch bars read timing records from results roots") {
  const auto root = testing::scratch_dir("report-tpch");
  for (const char* q : {"q01", "q06"}) {
    emit(root, "columnar", "tpch", Mode::FunctionCore, q, 1.5);
    emit(root, "lazycol", "tpch", Mode::FunctionCore, q, 1.0);
  }
  ReportSpec spec;
  spec.kind = ReportKind::TpchBars;
  spec.inputs = {root};
  spec.output = root / "tpch.csv";
  spec.format = "csv";
  report::render(spec);
  const std::string csv = slurp(root / "tpch.csv");
  CHECK(csv.find("q01,columnar,1.5") != std::string::npos);
  CHECK(csv.find("q06,lazycol,1") != std::string::npos);
}

TEST_CASE("io_runtime groups read and write means") {
  const auto root = synthetic_results();
  const auto out = testing::scratch_dir("report-io");
  ReportSpec spec;
  spec.kind = ReportKind::IoRuntime;
  spec.inputs = {root};
  spec.output = out / "io.csv";
  spec.format = "csv";
  report::render(spec);
  const std::string csv = slurp(out / "io.csv");
  CHECK(csv.find("read,columnar,1") != std::string::npos);
  CHECK(csv.find("write,lazycol,1") != std::string::npos);
}
