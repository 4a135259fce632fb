#pragma once

#include <variant>

#include "prepbench/table.hpp"
#include "prepbench/taxonomy.hpp"

namespace prepbench {

/// Summary record produced by the EDA preparators that return scalars or
/// per-column statistics rather than a transformed frame (isna, getcols,
/// dtypes, stats). The payload is a small canonical table with a documented
/// shape so summaries compare across engines like any other result:
///   getcols -> [column]
///   dtypes  -> [column, dtype]
///   isna    -> [column, null_count]
///   stats   -> [column, count, mean, std, min, q25, q50, q75, max]
struct ScalarResult {
  Table values;
  bool operator==(const ScalarResult&) const = default;
};

using ApplyResult = std::variant<Table, ScalarResult>;

inline const Table& result_table(const ApplyResult& r) {
  if (const auto* t = std::get_if<Table>(&r)) return *t;
  return std::get<ScalarResult>(r).values;
}

/// Deliberately simple, single-threaded row-store implementation of all 27
/// preparators. It is the correctness oracle for every adapter and the
/// executable definition of preparator semantics. Not built for speed;
/// intended for fixtures up to ~1e5 rows.
namespace refeng {

/// Pure per-call application. The call must already be validated. For `read`
/// the input table is ignored; for `write` the table is persisted and passed
/// through unchanged.
ApplyResult ref_apply(const Table& table, const PreparatorCall& call);

/// Join against an explicit right table (the generic entry ref_apply cannot
/// resolve table names; callers holding both sides use this directly).
Table ref_join(const Table& left, const Table& right, const PreparatorCall& call);

Table ref_pivot(const Table& table, const std::string& index, const std::string& columns,
                const std::string& values, const std::string& agg);

/// Exact quantile: sort + linear interpolation over the non-null values.
/// Returns null when the column has no non-null values.
double exact_quantile(std::vector<double> sorted_values, double q);

/// Quantile fences used by `outlier`: (lower, upper) thresholds from the two
/// quantiles extended by the IQR multiplier.
std::pair<double, double> outlier_fences(const Table& table, const std::string& column,
                                         double lower_q, double upper_q, double iqr_mult);

/// Column quantiles on the raw (unfenced) values, exact method.
std::pair<double, double> column_quantiles(const Table& table, const std::string& column,
                                           double lower_q, double upper_q);

/// Executes a pipeline's steps in order with the documented state threading:
/// observational EDA steps (isna, outlier, srchptn, getcols, dtypes, stats)
/// leave the frame unchanged; everything else replaces it.
Table run_pipeline(const PipelineSpec& spec,
                   const std::function<Table(const PreparatorCall&)>& join_resolver = {});

/// True when the step's result flows on as the new pipeline state.
bool threads_state(Preparator p);

}  // namespace refeng
}  // namespace prepbench
