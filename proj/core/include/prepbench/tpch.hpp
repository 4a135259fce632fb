#pragma once

#include <filesystem>

#include "prepbench/adapter.hpp"
#include "prepbench/executor.hpp"
#include "prepbench/table.hpp"

namespace prepbench {
namespace tpch {

/// TPC-H data-size parameter. sf 1 ~= 6M lineitem rows; desk-scale default
/// is 0.01.
struct ScaleFactor {
  double sf = 0.01;
};

inline constexpr const char* kTables[] = {"region",   "nation", "supplier", "customer",
                                          "part",     "partsupp", "orders", "lineitem"};

std::vector<ColumnSpec> table_schema(const std::string& table);

/// Writes the eight tables as pipe-delimited .tbl files (trailing pipe, no
/// header) with the official value domains and cardinalities scaled by sf.
/// Deterministic for a fixed seed.
void generate(const std::filesystem::path& data_dir, ScaleFactor sf, std::uint64_t seed = 1992);

/// Loads the .tbl files with the official schemas and registers each table
/// with the adapter under its name. Throws MissingTable / SchemaMismatch.
void load_tpch(Adapter& adapter, const std::filesystem::path& data_dir, ScaleFactor sf);

/// Loads one table as a canonical Table (oracle side).
Table load_table(const std::filesystem::path& data_dir, const std::string& table);

/// One step of a query plan: a preparator call applied to the previous
/// step's output (or a named table), optionally saved as a named
/// intermediate for later joins.
struct PlanStep {
  PreparatorCall op;
  std::string input;    // empty = previous result; else a table name
  std::string save_as;  // bind the result under this name
};

struct TpchQuery {
  std::string id;  // q01..q22
  std::vector<PlanStep> plan;
  bool ordered = true;  // every official query with an ORDER BY
  int limit = -1;       // applied to the canonical result after materialization
};

/// All 22 queries in the harness vocabulary. `sf` parameterizes q11's
/// HAVING fraction (0.0001 / sf per the official definition).
const TpchQuery& query(const std::string& id, ScaleFactor sf);
std::vector<std::string> query_ids();

/// Executes the plan on the adapter; timing spans dispatch through final
/// materialization (FUNCTION_CORE-equivalent). Tables must be loaded.
struct QueryRun {
  Table result;
  TimingRecord timing;
};
QueryRun run_query(Adapter& adapter, const std::string& id, ScaleFactor sf);

/// The independent relational oracle: executes the official SQL (SQLite
/// dialect) over the same generated data in an embedded database.
class RelationalOracle {
public:
  explicit RelationalOracle(const std::filesystem::path& data_dir);
  ~RelationalOracle();
  RelationalOracle(const RelationalOracle&) = delete;
  RelationalOracle& operator=(const RelationalOracle&) = delete;

  Table answer(const std::string& query_id, ScaleFactor sf);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// SQL text of one query in the oracle dialect.
std::string oracle_sql(const std::string& id, ScaleFactor sf);

struct ValidationReport {
  bool passed = false;
  std::string query_id;
  std::size_t mismatch_count = 0;
  std::string first_mismatch;  // "(row, col): expected .. got .." or schema error
};

/// Row-multiset equality with 1e-6 relative numeric tolerance; ordered
/// comparison (sortedness of the candidate) for ORDER BY queries is checked
/// by the caller via the query's sort step. Symmetric.
ValidationReport validate(const Table& result, const Table& oracle, const std::string& query_id);

}  // namespace tpch
}  // namespace prepbench
