#include "prepbench/adapter.hpp"

#include <cmath>
#include <random>

#include "prepbench/csv.hpp"
#include "prepbench/engines/columnar.hpp"
#include "prepbench/errors.hpp"

namespace prepbench {

AdapterRegistry& AdapterRegistry::instance() {
  static AdapterRegistry registry;
  return registry;
}

void AdapterRegistry::register_adapter(const AdapterDescriptor& descriptor,
                                       AdapterFactory factory) {
  const std::string& name = descriptor.engine.name;
  if (entries_.count(name)) throw DuplicateEngine(name);
  for (const Preparator p : all_preparators())
    if (!descriptor.supports.count(p))
      throw ValidationError("adapter '" + name + "' must declare a compatibility level for " +
                            to_string(p));
  entries_.emplace(name, Entry{descriptor, std::move(factory), nullptr});
}

bool AdapterRegistry::has(const std::string& name) const { return entries_.count(name) != 0; }

Adapter& AdapterRegistry::get(const std::string& name) {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw UnknownEngine(name);
  if (!it->second.shared) it->second.shared = it->second.factory();
  return *it->second.shared;
}

std::unique_ptr<Adapter> AdapterRegistry::make(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw UnknownEngine(name);
  return it->second.factory();
}

const AdapterDescriptor& AdapterRegistry::descriptor(const std::string& name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw UnknownEngine(name);
  return it->second.descriptor;
}

std::vector<std::string> AdapterRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

CompatibilityLevel AdapterRegistry::compatibility(const std::string& engine, Preparator p) const {
  return descriptor(engine).supports.at(p);
}

void AdapterRegistry::clear() { entries_.clear(); }

void register_builtin_adapters() {
  auto& reg = AdapterRegistry::instance();
  if (!reg.has("reference")) reg.register_adapter(reference_descriptor(), make_reference_adapter);
  if (!reg.has("columnar")) reg.register_adapter(columnar_descriptor(), make_columnar_adapter);
  if (!reg.has("lazycol")) reg.register_adapter(lazy_descriptor(), make_lazy_adapter);
}

std::vector<std::string> builtin_engine_names() { return {"reference", "columnar", "lazycol"}; }

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : static_cast<std::uint64_t>(
                          (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

}  // namespace

Table standard_fixture(std::int64_t rows) {
  std::mt19937_64 rng(7);
  static const char* cats[] = {"alpha", "Beta", "gamma", "Delta", "epsilon"};
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz";

  Table t({{"id", DataType::Int},
           {"qty", DataType::Int},
           {"price", DataType::Float},
           {"cat", DataType::String},
           {"name", DataType::String},
           {"flag", DataType::Bool},
           {"when", DataType::Datetime},
           {"datestr", DataType::String}});
  const std::int64_t epoch_lo = days_from_civil(2015, 1, 1) * 86400;
  const std::int64_t epoch_hi = days_from_civil(2018, 1, 1) * 86400;
  for (std::int64_t i = 0; i < rows; ++i) {
    std::vector<Value> row;
    row.push_back(i);
    row.push_back(bounded(rng, 100) < 5 ? Value{}
                                        : Value{static_cast<std::int64_t>(bounded(rng, 21))});
    double price = 1.0 + static_cast<double>(bounded(rng, 999000)) / 1000.0;
    if (i % 97 == 0) price *= 1000.0;  // plant outliers
    row.push_back(bounded(rng, 100) < 5 ? Value{} : Value{price});
    row.push_back(std::string(cats[bounded(rng, 5)]));
    if (bounded(rng, 100) < 10) {
      row.push_back(Value{});
    } else {
      std::string name;
      const std::uint64_t len = 3 + bounded(rng, 10);
      for (std::uint64_t k = 0; k < len; ++k) name += alphabet[bounded(rng, 26)];
      row.push_back(std::move(name));
    }
    row.push_back(bounded(rng, 100) < 3 ? Value{} : Value{(rng() & 1) != 0});
    const std::int64_t secs =
        epoch_lo + static_cast<std::int64_t>(bounded(rng, static_cast<std::uint64_t>(epoch_hi - epoch_lo)));
    const Datetime when{secs * 1000};
    row.push_back(when);
    row.push_back(format_datetime(Datetime{(secs / 86400) * 86400000}, "%d/%m/%Y"));
    t.rows().push_back(std::move(row));
  }
  return t;
}

namespace {

Table lookup_fixture() {
  Table t({{"cat", DataType::String}, {"region", DataType::String}});
  t.rows().push_back({std::string("alpha"), std::string("north")});
  t.rows().push_back({std::string("Beta"), std::string("south")});
  t.rows().push_back({std::string("gamma"), std::string("east")});
  t.rows().push_back({std::string("Delta"), std::string("west")});
  // epsilon intentionally missing: exercises left-join null fill.
  return t;
}

nlohmann::json J(const char* text) { return nlohmann::json::parse(text); }

}  // namespace

std::vector<PreparatorCall> standard_validation_calls() {
  std::vector<PreparatorCall> calls;
  const auto add = [&](Preparator op, const nlohmann::json& args) {
    calls.push_back(validate_call({op, args}));
  };
  add(Preparator::Read, J(R"({})"));  // path/format bound by the suite
  add(Preparator::Write, J(R"({"path": "", "format": "csv"})"));
  add(Preparator::IsNa, J(R"({})"));
  add(Preparator::Outlier, J(R"({"column": "price"})"));
  add(Preparator::SrchPtn, J(R"({"column": "name", "pattern": "ab"})"));
  add(Preparator::Sort, J(R"({"by": ["cat", "qty"], "ascending": [true, false]})"));
  add(Preparator::GetCols, J(R"({})"));
  add(Preparator::DTypes, J(R"({})"));
  add(Preparator::Stats, J(R"({})"));
  add(Preparator::Query, J(R"({"expr": "qty > 10 and price < 500.0"})"));
  add(Preparator::Cast, J(R"({"columns": {"qty": "float", "id": "string"}})"));
  add(Preparator::Drop, J(R"({"columns": ["datestr"]})"));
  add(Preparator::Rename, J(R"({"columns": {"price": "unit_price"}})"));
  add(Preparator::Pivot, J(R"({"index": "cat", "columns": "flag", "values": "price", "agg": "sum"})"));
  add(Preparator::CalcCol, J(R"({"column": "total", "expr": "qty * price"})"));
  add(Preparator::Join, J(R"({"other": "lookup", "on": ["cat"], "how": "left"})"));
  add(Preparator::OneHot, J(R"({"columns": ["cat"]})"));
  add(Preparator::CatEnc, J(R"({"columns": ["cat"]})"));
  add(Preparator::Group,
      J(R"({"by": ["cat"], "aggs": {"n": {"col": "id", "fn": "count"},
                                     "total": {"col": "price", "fn": "sum"},
                                     "avg_qty": {"col": "qty", "fn": "mean"},
                                     "kinds": {"col": "name", "fn": "nunique"}}})"));
  add(Preparator::ChDate, J(R"({"column": "datestr", "from_format": "%d/%m/%Y"})"));
  add(Preparator::DropNa, J(R"({"columns": ["qty", "price"]})"));
  add(Preparator::SetCase, J(R"({"columns": ["cat"], "mode": "title"})"));
  add(Preparator::Norm, J(R"({"column": "price"})"));
  add(Preparator::Dedup, J(R"({"columns": ["cat", "flag"]})"));
  add(Preparator::FillNa, J(R"({"columns": ["price"], "strategy": "mean"})"));
  add(Preparator::Replace, J(R"({"columns": ["cat"], "old": "gamma", "new": "GAMMA"})"));
  add(Preparator::Edit, J(R"({"row": 2, "column": "name", "value": "edited"})"));
  return calls;
}

std::vector<EquivalenceCheck> run_equivalence_suite(Adapter& adapter, std::int64_t fixture_rows,
                                                    const std::filesystem::path& scratch_dir) {
  std::filesystem::create_directories(scratch_dir);
  const Table fixture = standard_fixture(fixture_rows);
  const Table lookup = lookup_fixture();
  const auto fixture_csv = scratch_dir / "fixture.csv";
  write_csv(fixture, fixture_csv);

  adapter.reset_session();
  adapter.register_table("lookup", adapter.from_table(lookup));

  const bool approx = adapter.descriptor().approximate_quantiles;
  std::vector<EquivalenceCheck> checks;

  for (PreparatorCall call : standard_validation_calls()) {
    EquivalenceCheck check;
    check.op = call.op;
    const std::string engine_out = (scratch_dir / ("engine_out_" + adapter.descriptor().engine.name)).string();
    const std::string ref_out = (scratch_dir / "ref_out").string();
    try {
      if (call.op == Preparator::Read) {
        call.args["path"] = fixture_csv.string();
        call.args["format"] = "csv";
      }

      // Reference route.
      Table expected;
      if (call.op == Preparator::Join) {
        expected = refeng::ref_join(fixture, lookup, call);
      } else {
        PreparatorCall ref_call = call;
        if (call.op == Preparator::Write) ref_call.args["path"] = ref_out + ".csv";
        expected = result_table(refeng::ref_apply(fixture, ref_call));
      }

      // Engine route.
      PreparatorCall engine_call = call;
      if (call.op == Preparator::Write) engine_call.args["path"] = engine_out + ".csv";
      FrameHandle in;
      if (call.op != Preparator::Read) in = adapter.from_table(fixture);
      FrameHandle result = adapter.apply(in, engine_call);
      result = adapter.materialize(result);

      if (call.op == Preparator::Write) {
        // Compare the persisted artifacts, parsed back.
        expected = read_csv(ref_out + ".csv");
        const Table actual = read_csv(engine_out + ".csv");
        const auto cmp = compare_tables(expected, actual, {.ordered = true, .rel_tol = 1e-9});
        check.passed = cmp.equal;
        if (!cmp.equal)
          check.detail = cmp.schema_error.empty()
                             ? "first mismatch at row " + std::to_string(cmp.mismatches[0].row)
                             : cmp.schema_error;
        checks.push_back(check);
        continue;
      }

      if (call.op == Preparator::Outlier && approx) {
        // Approximate-quantile engines: compare thresholds, not row sets.
        const auto [eng_lo, eng_hi] = adapter.column_quantiles(in, "price", 0.25, 0.75);
        const auto [ref_lo, ref_hi] = refeng::column_quantiles(fixture, "price", 0.25, 0.75);
        const auto close = [](double a, double b) {
          return std::abs(a - b) <= 1e-2 * std::max({std::abs(a), std::abs(b), 1e-12});
        };
        check.passed = close(eng_lo, ref_lo) && close(eng_hi, ref_hi);
        if (!check.passed)
          check.detail = "quantile thresholds (" + std::to_string(eng_lo) + ", " +
                         std::to_string(eng_hi) + ") vs reference (" + std::to_string(ref_lo) +
                         ", " + std::to_string(ref_hi) + ") outside 1e-2 relative";
        checks.push_back(check);
        continue;
      }

      const Table actual = adapter.to_canonical(result);
      ComparePolicy policy;
      policy.ordered = call.op == Preparator::Sort;  // order-defining
      policy.rel_tol = 1e-9;
      const auto cmp = compare_tables(expected, actual, policy);
      check.passed = cmp.equal;
      if (!cmp.equal) {
        if (!cmp.schema_error.empty()) {
          check.detail = cmp.schema_error;
        } else {
          const auto& m = cmp.mismatches[0];
          check.detail = "cell (" + std::to_string(m.row) + ", " + std::to_string(m.col) +
                         "): expected '" + m.expected + "', got '" + m.actual + "'";
        }
      }
    } catch (const std::exception& e) {
      check.passed = false;
      check.detail = e.what();
    }
    checks.push_back(check);
  }
  adapter.reset_session();
  return checks;
}

}  // namespace prepbench
