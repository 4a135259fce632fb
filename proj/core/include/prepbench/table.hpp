#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "prepbench/value.hpp"

namespace prepbench {

struct ColumnSpec {
  std::string name;
  DataType type = DataType::String;
  bool operator==(const ColumnSpec&) const = default;
};

/// Row-store table with a typed schema and a canonical null marker. This is
/// the reference engine's working representation and the engine-neutral
/// interchange format every adapter exports to.
class Table {
public:
  Table() = default;
  explicit Table(std::vector<ColumnSpec> schema) : schema_(std::move(schema)) {}

  const std::vector<ColumnSpec>& schema() const { return schema_; }
  std::vector<ColumnSpec>& schema() { return schema_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return schema_.size(); }

  const std::vector<std::vector<Value>>& rows() const { return rows_; }
  std::vector<std::vector<Value>>& rows() { return rows_; }
  const std::vector<Value>& row(std::size_t i) const { return rows_[i]; }

  const Value& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  Value& at(std::size_t row, std::size_t col) { return rows_[row][col]; }

  /// Appends a row; arity must match the schema, values must conform to the
  /// declared column types (ValidationError otherwise).
  void append_row(std::vector<Value> row);

  /// Index of a column by name, or ColumnNotFound.
  std::size_t column_index(const std::string& name) const;
  std::optional<std::size_t> find_column(const std::string& name) const;
  bool has_column(const std::string& name) const { return find_column(name).has_value(); }

  std::vector<std::string> column_names() const;

  bool operator==(const Table&) const = default;

private:
  std::vector<ColumnSpec> schema_;
  std::vector<std::vector<Value>> rows_;
};

/// How two canonical tables are compared.
struct ComparePolicy {
  bool ordered = false;            ///< exact row order (order-defining ops like sort)
  double rel_tol = 1e-9;           ///< relative tolerance for numeric cells
  bool numeric_kind_loose = false; ///< treat int and float cells as one numeric kind
  bool datetime_as_text = false;   ///< compare datetime against ISO-rendered strings
};

struct CellMismatch {
  std::size_t row = 0;
  std::size_t col = 0;
  std::string expected;
  std::string actual;
};

struct CompareResult {
  bool equal = true;
  std::string schema_error;                ///< non-empty when schemas are incompatible
  std::vector<CellMismatch> mismatches;    ///< capped at 32 entries
};

/// Compares `actual` against `expected` under the policy. Unordered
/// comparison sorts both row sets by the full row (multiset semantics).
CompareResult compare_tables(const Table& expected, const Table& actual, const ComparePolicy& policy);

/// True when a and b match within the relative tolerance (exact for
/// non-numeric cells).
bool cells_match(const Value& a, const Value& b, const ComparePolicy& policy);

}  // namespace prepbench
