#include "prepbench/table.hpp"

#include <algorithm>
#include <cmath>

#include "prepbench/errors.hpp"

namespace prepbench {

void Table::append_row(std::vector<Value> row) {
  if (row.size() != schema_.size())
    throw ValidationError("row arity " + std::to_string(row.size()) + " != schema arity " +
                          std::to_string(schema_.size()));
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!conforms_to(row[i], schema_[i].type))
      throw ValidationError("value in column '" + schema_[i].name + "' does not conform to " +
                            to_string(schema_[i].type));
  }
  rows_.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  if (auto i = find_column(name)) return *i;
  throw ColumnNotFound(name);
}

std::optional<std::size_t> Table::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i)
    if (schema_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(schema_.size());
  for (const auto& c : schema_) names.push_back(c.name);
  return names;
}

namespace {

bool is_numeric(DataType t) { return t == DataType::Int || t == DataType::Float; }

bool numbers_match(double a, double b, double rel_tol) {
  if (a == b) return true;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel_tol * std::max(scale, 1e-12);
}

}  // namespace

bool cells_match(const Value& a, const Value& b, const ComparePolicy& policy) {
  if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
  const DataType ta = type_of(a), tb = type_of(b);
  if (is_numeric(ta) && is_numeric(tb)) {
    if (!policy.numeric_kind_loose && ta != tb) return false;
    return numbers_match(as_double(a), as_double(b), policy.rel_tol);
  }
  if (policy.datetime_as_text && (ta == DataType::Datetime || tb == DataType::Datetime)) {
    const auto text = [](const Value& v) {
      return type_of(v) == DataType::Datetime ? iso_datetime(std::get<Datetime>(v))
                                              : std::get<std::string>(v);
    };
    if (ta == DataType::Datetime ? tb == DataType::String || tb == DataType::Datetime
                                 : ta == DataType::String)
      return text(a) == text(b);
  }
  return values_equal(a, b);
}

CompareResult compare_tables(const Table& expected, const Table& actual, const ComparePolicy& policy) {
  CompareResult res;
  const auto& es = expected.schema();
  const auto& as = actual.schema();
  if (es.size() != as.size()) {
    res.equal = false;
    res.schema_error = "column count " + std::to_string(as.size()) + " != expected " +
                       std::to_string(es.size());
    return res;
  }
  for (std::size_t i = 0; i < es.size(); ++i) {
    if (es[i].name != as[i].name) {
      res.equal = false;
      res.schema_error = "column " + std::to_string(i) + " named '" + as[i].name +
                         "', expected '" + es[i].name + "'";
      return res;
    }
    bool compatible = es[i].type == as[i].type;
    if (policy.numeric_kind_loose && is_numeric(es[i].type) && is_numeric(as[i].type))
      compatible = true;
    if (policy.datetime_as_text &&
        (es[i].type == DataType::Datetime || as[i].type == DataType::Datetime) &&
        (es[i].type == DataType::String || as[i].type == DataType::String))
      compatible = true;
    if (!compatible) {
      res.equal = false;
      res.schema_error = "column '" + es[i].name + "' type " + to_string(as[i].type) +
                         ", expected " + to_string(es[i].type);
      return res;
    }
  }
  if (expected.row_count() != actual.row_count()) {
    res.equal = false;
    res.schema_error = "row count " + std::to_string(actual.row_count()) + " != expected " +
                       std::to_string(expected.row_count());
    return res;
  }

  const auto row_less = [](const std::vector<Value>& a, const std::vector<Value>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      const int c = compare_values(a[i], b[i]);
      if (c != 0) return c < 0;
    }
    return false;
  };

  std::vector<std::size_t> eidx(expected.row_count()), aidx(actual.row_count());
  for (std::size_t i = 0; i < eidx.size(); ++i) eidx[i] = i;
  for (std::size_t i = 0; i < aidx.size(); ++i) aidx[i] = i;
  if (!policy.ordered) {
    std::sort(eidx.begin(), eidx.end(),
              [&](auto a, auto b) { return row_less(expected.row(a), expected.row(b)); });
    std::sort(aidx.begin(), aidx.end(),
              [&](auto a, auto b) { return row_less(actual.row(a), actual.row(b)); });
  }

  for (std::size_t r = 0; r < eidx.size(); ++r) {
    const auto& erow = expected.row(eidx[r]);
    const auto& arow = actual.row(aidx[r]);
    for (std::size_t c = 0; c < erow.size(); ++c) {
      if (!cells_match(erow[c], arow[c], policy)) {
        res.equal = false;
        if (res.mismatches.size() < 32)
          res.mismatches.push_back({aidx[r], c, render_value(erow[c]), render_value(arow[c])});
      }
    }
  }
  return res;
}

}  // namespace prepbench
