#pragma once

#include <functional>
#include <variant>

#include "prepbench/adapter.hpp"
#include "prepbench/table.hpp"
#include "prepbench/taxonomy.hpp"

namespace prepbench::colstore {

/// Typed column with a validity mask. Int and Datetime share int64 storage;
/// the declared DataType disambiguates.
struct Column {
  std::string name;
  DataType type = DataType::Float;
  std::vector<std::uint8_t> valid;
  std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::uint8_t>,
               std::vector<std::string>>
      data;

  std::size_t size() const { return valid.size(); }
  Value value_at(std::size_t i) const;
  void append(const Value& v);
  void set(std::size_t i, const Value& v);
  static Column make(std::string name, DataType type, std::size_t reserve = 0);
};

struct ColumnTable {
  std::vector<Column> columns;
  std::size_t n_rows = 0;

  std::size_t column_index(const std::string& name) const;
  std::optional<std::size_t> find_column(const std::string& name) const;
  std::vector<ColumnSpec> schema() const;
  std::vector<Value> scratch_row(std::size_t i) const;
};

ColumnTable from_rows(const Table& table);
Table to_rows(const ColumnTable& table);

ColumnTable gather(const ColumnTable& table, const std::vector<std::uint32_t>& indices);

/// How the engine computes quantiles for the outlier path.
enum class QuantileMethod {
  SortInterpolate,  // exact: sort + linear interpolation
  NearestRank,      // inexact: sort + nearest-rank, no interpolation
};

double column_quantile(const Column& col, double q, QuantileMethod method);

struct OpContext {
  QuantileMethod quantiles = QuantileMethod::SortInterpolate;
  /// Resolves a join's `other`: registered session table or dataset path.
  std::function<ColumnTable(const std::string&)> resolve_table;
};

/// One preparator over columnar storage; semantics mirror the reference
/// engine. Summary EDA ops return the documented summary frames.
ColumnTable apply_op(const ColumnTable& in, const PreparatorCall& call, const OpContext& ctx);

/// In-place variant used by the lazy engine's plan replay: consumes the
/// input when the kernel can run destructively (falls back to apply_op).
ColumnTable apply_op_owned(ColumnTable&& in, const PreparatorCall& call, const OpContext& ctx);

/// Schema effect of one op without touching data; nullopt when the result
/// columns are data-dependent (onehot, pivot, read).
std::optional<std::vector<ColumnSpec>> infer_schema(const std::vector<ColumnSpec>& in,
                                                    const PreparatorCall& call,
                                                    const OpContext& ctx);

}  // namespace prepbench::colstore

namespace prepbench {

/// Eager columnar engine ("columnar"): every apply materializes immediately.
/// Registry baseline for speedup reports.
std::unique_ptr<Adapter> make_columnar_adapter();
AdapterDescriptor columnar_descriptor();

/// Lazy engine ("lazycol"): apply records a logical plan, materialize replays
/// it over the columnar kernels with in-place execution and filter fusion.
/// Quantiles by nearest-rank (declared approximate).
std::unique_ptr<Adapter> make_lazy_adapter();
AdapterDescriptor lazy_descriptor();

/// Reference-engine adapter ("reference"): the oracle behind the adapter
/// interface. Excluded from benchmark reports by default.
std::unique_ptr<Adapter> make_reference_adapter();
AdapterDescriptor reference_descriptor();

}  // namespace prepbench
