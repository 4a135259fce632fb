#include "prepbench/tpch.hpp"

#include <chrono>

#include "prepbench/errors.hpp"

namespace prepbench::tpch {

namespace {

bool query_is_ordered(const std::string& id) {
  // Queries whose official text has no ORDER BY (single-row aggregates).
  return !(id == "q06" || id == "q14" || id == "q17" || id == "q19");
}

Table align_columns(const Table& expected, const Table& actual, bool& ok, std::string& error) {
  Table aligned;
  ok = true;
  if (expected.schema().size() != actual.schema().size()) {
    ok = false;
    error = "column count " + std::to_string(actual.schema().size()) + " != expected " +
            std::to_string(expected.schema().size());
    return aligned;
  }
  std::vector<std::size_t> order;
  for (const auto& col : expected.schema()) {
    const auto i = actual.find_column(col.name);
    if (!i) {
      ok = false;
      error = "missing column '" + col.name + "'";
      return aligned;
    }
    order.push_back(*i);
  }
  for (const std::size_t i : order) aligned.schema().push_back(actual.schema()[i]);
  aligned.rows().reserve(actual.row_count());
  for (const auto& row : actual.rows()) {
    std::vector<Value> r;
    r.reserve(order.size());
    for (const std::size_t i : order) r.push_back(row[i]);
    aligned.rows().push_back(std::move(r));
  }
  return aligned;
}

}  // namespace

QueryRun run_query(Adapter& adapter, const std::string& id, ScaleFactor sf) {
  const TpchQuery& q = query(id, sf);
  QueryRun out;
  out.timing.engine = adapter.descriptor().engine.name;
  out.timing.pipeline = "tpch";
  out.timing.target = id;
  out.timing.mode = Mode::FunctionCore;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    FrameHandle current;
    for (const auto& step : q.plan) {
      FrameHandle in = current;
      if (!step.input.empty()) {
        const auto named = adapter.lookup_table(step.input);
        if (!named) throw MissingTable(step.input);
        in = *named;
      }
      current = adapter.apply(in, step.op);
      if (!step.save_as.empty()) adapter.register_table(step.save_as, current);
    }
    current = adapter.materialize(current);  // timing includes materialization
    out.timing.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.timing.status = RunStatus::OK;
    out.result = adapter.to_canonical(current);
    if (q.limit >= 0 && out.result.row_count() > static_cast<std::size_t>(q.limit))
      out.result.rows().resize(static_cast<std::size_t>(q.limit));
  } catch (const std::exception& e) {
    out.timing.status = classify_failure(e);
    out.timing.detail = e.what();
  }
  return out;
}

namespace {

bool all_null_single_row(const Table& t) {
  if (t.row_count() != 1) return false;
  for (const auto& v : t.row(0))
    if (!is_null(v)) return false;
  return true;
}

bool column_names_match(const Table& a, const Table& b) {
  if (a.schema().size() != b.schema().size()) return false;
  for (const auto& col : a.schema())
    if (!b.has_column(col.name)) return false;
  return true;
}

}  // namespace

ValidationReport validate(const Table& result, const Table& oracle, const std::string& query_id) {
  ValidationReport report;
  report.query_id = query_id;

  // Empty result sets carry no type information on the SQL side, and a
  // global aggregate over zero rows is one all-NULL row in SQL but an empty
  // frame in the dataframe vocabulary. Both count as agreement.
  const bool lhs_empty = result.row_count() == 0 || all_null_single_row(result);
  const bool rhs_empty = oracle.row_count() == 0 || all_null_single_row(oracle);
  if (lhs_empty && rhs_empty) {
    report.passed = column_names_match(oracle, result);
    if (!report.passed) {
      report.mismatch_count = 1;
      report.first_mismatch = "empty results with different column sets";
    }
    return report;
  }

  bool ok = true;
  std::string error;
  const Table aligned = align_columns(oracle, result, ok, error);
  if (!ok) {
    report.passed = false;
    report.mismatch_count = 1;
    report.first_mismatch = error;
    return report;
  }

  ComparePolicy policy;
  policy.ordered = query_is_ordered(query_id);
  policy.rel_tol = 1e-6;
  policy.numeric_kind_loose = true;  // the oracle's integer sums vs engine floats
  policy.datetime_as_text = true;    // the oracle stores dates as ISO text
  const CompareResult cmp = compare_tables(oracle, aligned, policy);
  report.passed = cmp.equal;
  if (!cmp.equal) {
    if (!cmp.schema_error.empty()) {
      report.mismatch_count = 1;
      report.first_mismatch = cmp.schema_error;
    } else {
      report.mismatch_count = cmp.mismatches.size();
      const auto& m = cmp.mismatches.front();
      report.first_mismatch = "(" + std::to_string(m.row) + ", " + std::to_string(m.col) +
                              "): expected '" + m.expected + "', got '" + m.actual + "'";
    }
  }
  return report;
}

}  // namespace prepbench::tpch
