#include "prepbench/engines/columnar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <unordered_map>
#include <unordered_set>

#include "prepbench/csv.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/expr.hpp"
#include "prepbench/parquet.hpp"

namespace prepbench::colstore {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.get<std::string>());
  return out;
}

Value value_from_json(const json& v) {
  if (v.is_null()) return Value{};
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return v.get<double>();
  return v.get<std::string>();
}

Value coerce_to(const Value& v, DataType t) {
  if (is_null(v) || type_of(v) == t) return v;
  if (t == DataType::Float && std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  if (t == DataType::Datetime && std::holds_alternative<std::string>(v)) {
    const auto& s = std::get<std::string>(v);
    if (auto dt = parse_datetime(s, "%Y-%m-%d %H:%M:%S")) return *dt;
    if (auto dt = parse_iso_date(s)) return *dt;
  }
  throw TypeMismatch("cannot coerce " + render_value(v) + " to " + to_string(t));
}

}  // namespace

Column Column::make(std::string name, DataType type, std::size_t reserve) {
  Column c;
  c.name = std::move(name);
  c.type = type;
  switch (type) {
    case DataType::Int:
    case DataType::Datetime: c.data = std::vector<std::int64_t>(); break;
    case DataType::Float: c.data = std::vector<double>(); break;
    case DataType::Bool: c.data = std::vector<std::uint8_t>(); break;
    case DataType::String: c.data = std::vector<std::string>(); break;
  }
  if (reserve) {
    c.valid.reserve(reserve);
    std::visit([reserve](auto& v) { v.reserve(reserve); }, c.data);
  }
  return c;
}

Value Column::value_at(std::size_t i) const {
  if (!valid[i]) return Value{};
  switch (type) {
    case DataType::Int: return std::get<std::vector<std::int64_t>>(data)[i];
    case DataType::Datetime: return Datetime{std::get<std::vector<std::int64_t>>(data)[i]};
    case DataType::Float: return std::get<std::vector<double>>(data)[i];
    case DataType::Bool: return std::get<std::vector<std::uint8_t>>(data)[i] != 0;
    case DataType::String: return std::get<std::vector<std::string>>(data)[i];
  }
  return Value{};
}

void Column::append(const Value& v) {
  valid.push_back(!is_null(v));
  if (is_null(v)) {
    std::visit([](auto& vec) { vec.emplace_back(); }, data);
    return;
  }
  switch (type) {
    case DataType::Int:
      std::get<std::vector<std::int64_t>>(data).push_back(std::get<std::int64_t>(v));
      break;
    case DataType::Datetime:
      std::get<std::vector<std::int64_t>>(data).push_back(std::get<Datetime>(v).millis);
      break;
    case DataType::Float:
      std::get<std::vector<double>>(data).push_back(std::get<double>(v));
      break;
    case DataType::Bool:
      std::get<std::vector<std::uint8_t>>(data).push_back(std::get<bool>(v) ? 1 : 0);
      break;
    case DataType::String:
      std::get<std::vector<std::string>>(data).push_back(std::get<std::string>(v));
      break;
  }
}

void Column::set(std::size_t i, const Value& v) {
  valid[i] = !is_null(v);
  if (is_null(v)) return;
  switch (type) {
    case DataType::Int: std::get<std::vector<std::int64_t>>(data)[i] = std::get<std::int64_t>(v); break;
    case DataType::Datetime:
      std::get<std::vector<std::int64_t>>(data)[i] = std::get<Datetime>(v).millis;
      break;
    case DataType::Float: std::get<std::vector<double>>(data)[i] = std::get<double>(v); break;
    case DataType::Bool: std::get<std::vector<std::uint8_t>>(data)[i] = std::get<bool>(v) ? 1 : 0; break;
    case DataType::String: std::get<std::vector<std::string>>(data)[i] = std::get<std::string>(v); break;
  }
}

std::size_t ColumnTable::column_index(const std::string& name) const {
  if (auto i = find_column(name)) return *i;
  throw ColumnNotFound(name);
}

std::optional<std::size_t> ColumnTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

std::vector<ColumnSpec> ColumnTable::schema() const {
  std::vector<ColumnSpec> s;
  s.reserve(columns.size());
  for (const auto& c : columns) s.push_back({c.name, c.type});
  return s;
}

std::vector<Value> ColumnTable::scratch_row(std::size_t i) const {
  std::vector<Value> row;
  row.reserve(columns.size());
  for (const auto& c : columns) row.push_back(c.value_at(i));
  return row;
}

ColumnTable from_rows(const Table& table) {
  ColumnTable out;
  out.n_rows = table.row_count();
  for (const auto& spec : table.schema())
    out.columns.push_back(Column::make(spec.name, spec.type, out.n_rows));
  for (const auto& row : table.rows())
    for (std::size_t c = 0; c < row.size(); ++c) out.columns[c].append(row[c]);
  return out;
}

Table to_rows(const ColumnTable& table) {
  Table out(table.schema());
  out.rows().reserve(table.n_rows);
  for (std::size_t r = 0; r < table.n_rows; ++r) out.rows().push_back(table.scratch_row(r));
  return out;
}

ColumnTable gather(const ColumnTable& table, const std::vector<std::uint32_t>& indices) {
  ColumnTable out;
  out.n_rows = indices.size();
  out.columns.reserve(table.columns.size());
  for (const auto& col : table.columns) {
    Column g = Column::make(col.name, col.type, indices.size());
    std::visit(
        [&](const auto& src) {
          auto& dst = std::get<std::decay_t<decltype(src)>>(g.data);
          for (const std::uint32_t i : indices) {
            dst.push_back(src[i]);
            g.valid.push_back(col.valid[i]);
          }
        },
        col.data);
    out.columns.push_back(std::move(g));
  }
  return out;
}

namespace {

std::vector<double> sorted_numeric(const Column& col) {
  if (col.type != DataType::Int && col.type != DataType::Float)
    throw TypeMismatch("column '" + col.name + "' is not numeric");
  std::vector<double> vals;
  vals.reserve(col.size());
  if (col.type == DataType::Int) {
    const auto& d = std::get<std::vector<std::int64_t>>(col.data);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (col.valid[i]) vals.push_back(static_cast<double>(d[i]));
  } else {
    const auto& d = std::get<std::vector<double>>(col.data);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (col.valid[i]) vals.push_back(d[i]);
  }
  std::sort(vals.begin(), vals.end());
  return vals;
}

double quantile_of_sorted(const std::vector<double>& vals, double q, QuantileMethod method) {
  if (vals.empty()) return std::nan("");
  if (method == QuantileMethod::NearestRank) {
    // ceil(q * n) as a 1-based rank, clamped into range.
    const auto rank = static_cast<std::size_t>(
        std::max<double>(1.0, std::ceil(q * static_cast<double>(vals.size()))));
    return vals[std::min(rank, vals.size()) - 1];
  }
  const double h = q * static_cast<double>(vals.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, vals.size() - 1);
  return vals[lo] + (h - std::floor(h)) * (vals[hi] - vals[lo]);
}

}  // namespace

double column_quantile(const Column& col, double q, QuantileMethod method) {
  return quantile_of_sorted(sorted_numeric(col), q, method);
}

namespace {

std::string row_key(const ColumnTable& t, const std::vector<std::size_t>& cols, std::size_t r) {
  std::string key;
  for (const std::size_t c : cols) {
    key += value_key(t.columns[c].value_at(r));
    key += '\x02';
  }
  return key;
}

ColumnTable summary_getcols(const ColumnTable& t) {
  ColumnTable s;
  s.columns.push_back(Column::make("column", DataType::String, t.columns.size()));
  for (const auto& c : t.columns) s.columns[0].append(c.name);
  s.n_rows = t.columns.size();
  return s;
}

ColumnTable summary_dtypes(const ColumnTable& t) {
  ColumnTable s;
  s.columns.push_back(Column::make("column", DataType::String, t.columns.size()));
  s.columns.push_back(Column::make("dtype", DataType::String, t.columns.size()));
  for (const auto& c : t.columns) {
    s.columns[0].append(c.name);
    s.columns[1].append(std::string(to_string(c.type)));
  }
  s.n_rows = t.columns.size();
  return s;
}

ColumnTable summary_isna(const ColumnTable& t, const json& args) {
  std::vector<std::string> names;
  if (args.contains("columns")) names = string_list(args["columns"]);
  else
    for (const auto& c : t.columns) names.push_back(c.name);
  ColumnTable s;
  s.columns.push_back(Column::make("column", DataType::String, names.size()));
  s.columns.push_back(Column::make("null_count", DataType::Int, names.size()));
  for (const auto& name : names) {
    const auto& col = t.columns[t.column_index(name)];
    std::int64_t nulls = 0;
    for (const std::uint8_t v : col.valid) nulls += v == 0;
    s.columns[0].append(name);
    s.columns[1].append(nulls);
  }
  s.n_rows = names.size();
  return s;
}

ColumnTable summary_stats(const ColumnTable& t, const json& args) {
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.columns)
      if (c.type == DataType::Int || c.type == DataType::Float) names.push_back(c.name);
  }
  ColumnTable s;
  s.columns.push_back(Column::make("column", DataType::String, names.size()));
  s.columns.push_back(Column::make("count", DataType::Int, names.size()));
  for (const char* n : {"mean", "std", "min", "q25", "q50", "q75", "max"})
    s.columns.push_back(Column::make(n, DataType::Float, names.size()));
  for (const auto& name : names) {
    const auto vals = sorted_numeric(t.columns[t.column_index(name)]);
    const auto n = static_cast<std::int64_t>(vals.size());
    s.columns[0].append(name);
    s.columns[1].append(n);
    if (n == 0) {
      for (std::size_t c = 2; c < 9; ++c) s.columns[c].append(Value{});
      continue;
    }
    double sum = 0;
    for (const double v : vals) sum += v;
    const double mean = sum / static_cast<double>(n);
    s.columns[2].append(mean);
    if (n > 1) {
      double ss = 0;
      for (const double v : vals) ss += (v - mean) * (v - mean);
      s.columns[3].append(std::sqrt(ss / static_cast<double>(n - 1)));
    } else {
      s.columns[3].append(Value{});
    }
    s.columns[4].append(vals.front());
    s.columns[5].append(quantile_of_sorted(vals, 0.25, QuantileMethod::SortInterpolate));
    s.columns[6].append(quantile_of_sorted(vals, 0.50, QuantileMethod::SortInterpolate));
    s.columns[7].append(quantile_of_sorted(vals, 0.75, QuantileMethod::SortInterpolate));
    s.columns[8].append(vals.back());
  }
  s.n_rows = names.size();
  return s;
}

ColumnTable filter_by_mask(const ColumnTable& t, const std::vector<std::uint8_t>& mask) {
  std::vector<std::uint32_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(static_cast<std::uint32_t>(i));
  return gather(t, idx);
}

ColumnTable op_outlier(const ColumnTable& t, const json& args, const OpContext& ctx) {
  const auto& col = t.columns[t.column_index(args["column"].get<std::string>())];
  const auto vals = sorted_numeric(col);
  const double qlo = quantile_of_sorted(vals, args["lower_quantile"].get<double>(), ctx.quantiles);
  const double qhi = quantile_of_sorted(vals, args["upper_quantile"].get<double>(), ctx.quantiles);
  const double mult = args["iqr_multiplier"].get<double>();
  const double lo = qlo - mult * (qhi - qlo);
  const double hi = qhi + mult * (qhi - qlo);
  std::vector<std::uint8_t> mask(t.n_rows, 0);
  if (!vals.empty()) {
    for (std::size_t i = 0; i < t.n_rows; ++i) {
      if (!col.valid[i]) continue;
      const double v = as_double(col.value_at(i));
      mask[i] = v < lo || v > hi;
    }
  }
  return filter_by_mask(t, mask);
}

ColumnTable op_srchptn(const ColumnTable& t, const json& args) {
  const auto& col = t.columns[t.column_index(args["column"].get<std::string>())];
  if (col.type != DataType::String) throw TypeMismatch("srchptn column must be a string column");
  const auto& data = std::get<std::vector<std::string>>(col.data);
  const std::string pattern = args["pattern"].get<std::string>();
  std::vector<std::uint8_t> mask(t.n_rows, 0);
  if (args["regex"].get<bool>()) {
    const std::regex re(pattern);
    for (std::size_t i = 0; i < t.n_rows; ++i)
      mask[i] = col.valid[i] && std::regex_search(data[i], re);
  } else {
    for (std::size_t i = 0; i < t.n_rows; ++i)
      mask[i] = col.valid[i] && data[i].find(pattern) != std::string::npos;
  }
  return filter_by_mask(t, mask);
}

ColumnTable op_sort(const ColumnTable& t, const json& args) {
  const auto by = string_list(args["by"]);
  std::vector<std::size_t> cols;
  for (const auto& name : by) cols.push_back(t.column_index(name));
  std::vector<bool> asc(by.size(), true);
  if (args["ascending"].is_boolean()) {
    asc.assign(by.size(), args["ascending"].get<bool>());
  } else {
    if (args["ascending"].size() != by.size())
      throw InvalidArgument("sort: 'ascending' list length must match 'by'");
    for (std::size_t i = 0; i < by.size(); ++i) asc[i] = args["ascending"][i].get<bool>();
  }
  std::vector<std::uint32_t> idx(t.n_rows);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint32_t>(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& col = t.columns[cols[k]];
      const bool na = !col.valid[a], nb = !col.valid[b];
      if (na || nb) {
        if (na && nb) continue;
        return nb;  // nulls last either direction
      }
      const Value va = col.value_at(a);
      const Value vb = col.value_at(b);
      const int c = compare_values(va, vb);
      if (c != 0) return asc[k] ? c < 0 : c > 0;
    }
    return false;
  });
  return gather(t, idx);
}

ColumnTable op_query(const ColumnTable& t, const json& args) {
  const expr::Compiled pred(args["expr"].get<std::string>(), t.schema());
  std::vector<std::uint8_t> mask(t.n_rows, 0);
  for (std::size_t i = 0; i < t.n_rows; ++i) mask[i] = pred.matches(t.scratch_row(i));
  return filter_by_mask(t, mask);
}

Column cast_column(const Column& col, DataType to, const std::string& format) {
  Column out = Column::make(col.name, to, col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (!col.valid[i]) {
      out.append(Value{});
      continue;
    }
    switch (to) {
      case DataType::Int: {
        std::int64_t v = 0;
        switch (col.type) {
          case DataType::Int: v = std::get<std::vector<std::int64_t>>(col.data)[i]; break;
          case DataType::Datetime: v = std::get<std::vector<std::int64_t>>(col.data)[i]; break;
          case DataType::Float:
            v = static_cast<std::int64_t>(std::trunc(std::get<std::vector<double>>(col.data)[i]));
            break;
          case DataType::Bool: v = std::get<std::vector<std::uint8_t>>(col.data)[i] ? 1 : 0; break;
          case DataType::String: {
            const auto& s = std::get<std::vector<std::string>>(col.data)[i];
            const char* b = s.data();
            auto [p, ec] = std::from_chars(b, b + s.size(), v);
            if (ec != std::errc() || p != b + s.size())
              throw TypeMismatch("cannot cast '" + s + "' to int");
            break;
          }
        }
        out.append(v);
        break;
      }
      case DataType::Float: {
        double v = 0;
        switch (col.type) {
          case DataType::Float: v = std::get<std::vector<double>>(col.data)[i]; break;
          case DataType::Int:
            v = static_cast<double>(std::get<std::vector<std::int64_t>>(col.data)[i]);
            break;
          case DataType::Bool: v = std::get<std::vector<std::uint8_t>>(col.data)[i] ? 1.0 : 0.0; break;
          case DataType::String: {
            const auto& s = std::get<std::vector<std::string>>(col.data)[i];
            const char* b = s.data();
            auto [p, ec] = std::from_chars(b, b + s.size(), v);
            if (ec != std::errc() || p != b + s.size())
              throw TypeMismatch("cannot cast '" + s + "' to float");
            break;
          }
          default: throw TypeMismatch("unsupported cast to float");
        }
        out.append(v);
        break;
      }
      case DataType::Bool: {
        bool v = false;
        switch (col.type) {
          case DataType::Bool: v = std::get<std::vector<std::uint8_t>>(col.data)[i] != 0; break;
          case DataType::Int: v = std::get<std::vector<std::int64_t>>(col.data)[i] != 0; break;
          case DataType::Float: v = std::get<std::vector<double>>(col.data)[i] != 0.0; break;
          case DataType::String: {
            const auto& s = std::get<std::vector<std::string>>(col.data)[i];
            if (s == "true" || s == "True" || s == "TRUE") v = true;
            else if (s == "false" || s == "False" || s == "FALSE") v = false;
            else throw TypeMismatch("cannot cast '" + s + "' to bool");
            break;
          }
          default: throw TypeMismatch("unsupported cast to bool");
        }
        out.append(v);
        break;
      }
      case DataType::String: {
        if (col.type == DataType::Datetime && !format.empty()) {
          out.append(format_datetime(Datetime{std::get<std::vector<std::int64_t>>(col.data)[i]},
                                     format));
        } else {
          out.append(render_value(col.value_at(i)));
        }
        break;
      }
      case DataType::Datetime: {
        if (col.type == DataType::String) {
          const auto& s = std::get<std::vector<std::string>>(col.data)[i];
          const std::string fmt = format.empty() ? "%Y-%m-%d" : format;
          const auto dt = parse_datetime(s, fmt);
          if (!dt) throw TypeMismatch("cannot parse '" + s + "' as datetime with format " + fmt);
          out.append(*dt);
        } else if (col.type == DataType::Int) {
          out.append(Datetime{std::get<std::vector<std::int64_t>>(col.data)[i]});
        } else {
          throw TypeMismatch("unsupported cast to datetime");
        }
        break;
      }
    }
  }
  return out;
}

ColumnTable op_cast(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  const std::string format = args.value("format", "");
  for (const auto& [name, type_name] : args["columns"].items()) {
    const std::size_t c = out.column_index(name);
    const auto to = data_type_from_string(type_name.get<std::string>());
    if (!to) throw InvalidArgument("cast: unknown type '" + type_name.get<std::string>() + "'");
    if (out.columns[c].type != *to) out.columns[c] = cast_column(out.columns[c], *to, format);
  }
  return out;
}

ColumnTable op_drop(const ColumnTable& t, const json& args) {
  std::unordered_set<std::size_t> drop;
  for (const auto& name : string_list(args["columns"])) drop.insert(t.column_index(name));
  ColumnTable out;
  out.n_rows = t.n_rows;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (!drop.count(c)) out.columns.push_back(t.columns[c]);
  return out;
}

ColumnTable op_rename(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  for (const auto& [from, to] : args["columns"].items()) {
    const std::size_t c = out.column_index(from);
    const std::string target = to.get<std::string>();
    if (out.find_column(target) && *out.find_column(target) != c)
      throw InvalidArgument("rename: target column '" + target + "' already exists");
    out.columns[c].name = target;
  }
  return out;
}

DataType calccol_result_type(const expr::Compiled& ex, const std::vector<Value>& values) {
  if (auto st = ex.static_type()) return *st;
  bool any = false, all_int = true, all_numeric = true;
  std::optional<DataType> other;
  for (const auto& v : values) {
    if (is_null(v)) continue;
    any = true;
    const DataType vt = type_of(v);
    all_int &= vt == DataType::Int;
    const bool numeric = vt == DataType::Int || vt == DataType::Float;
    all_numeric &= numeric;
    if (!numeric) {
      if (other && *other != vt) throw TypeMismatch("calccol produced mixed value types");
      other = vt;
    }
  }
  if (!any) return DataType::Float;
  if (all_int) return DataType::Int;
  if (all_numeric) return DataType::Float;
  if (other) {
    for (const auto& v : values)
      if (!is_null(v) && (type_of(v) == DataType::Int || type_of(v) == DataType::Float))
        throw TypeMismatch("calccol produced mixed value types");
    return *other;
  }
  return DataType::Float;
}

ColumnTable op_calccol(const ColumnTable& t, const json& args) {
  const std::string name = args["column"].get<std::string>();
  const expr::Compiled ex(args["expr"].get<std::string>(), t.schema());
  std::vector<Value> values;
  values.reserve(t.n_rows);
  for (std::size_t i = 0; i < t.n_rows; ++i) values.push_back(ex.eval(t.scratch_row(i)));
  const DataType type = calccol_result_type(ex, values);

  Column col = Column::make(name, type, t.n_rows);
  for (auto& v : values) {
    if (!is_null(v) && type == DataType::Float && std::holds_alternative<std::int64_t>(v))
      v = static_cast<double>(std::get<std::int64_t>(v));
    col.append(v);
  }
  ColumnTable out = t;
  if (auto existing = out.find_column(name)) out.columns[*existing] = std::move(col);
  else out.columns.push_back(std::move(col));
  return out;
}

std::vector<Value> distinct_sorted_values(const Column& col, bool render_order) {
  std::unordered_set<std::string> seen;
  std::vector<Value> distinct;
  for (std::size_t i = 0; i < col.size(); ++i) {
    const Value v = col.value_at(i);
    if (is_null(v)) continue;
    if (seen.insert(value_key(v)).second) distinct.push_back(v);
  }
  if (render_order) {
    std::sort(distinct.begin(), distinct.end(),
              [](const Value& a, const Value& b) { return render_value(a) < render_value(b); });
  } else {
    std::sort(distinct.begin(), distinct.end(),
              [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });
  }
  return distinct;
}

ColumnTable op_onehot(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  for (const auto& name : string_list(args["columns"])) {
    const std::size_t c = out.column_index(name);
    const Column src = std::move(out.columns[c]);
    out.columns.erase(out.columns.begin() + static_cast<std::ptrdiff_t>(c));
    for (const auto& d : distinct_sorted_values(src, false)) {
      Column dummy = Column::make(src.name + "=" + render_value(d), DataType::Int, out.n_rows);
      for (std::size_t i = 0; i < src.size(); ++i) {
        const Value v = src.value_at(i);
        dummy.append(static_cast<std::int64_t>(!is_null(v) && values_equal(v, d) ? 1 : 0));
      }
      out.columns.push_back(std::move(dummy));
    }
  }
  return out;
}

ColumnTable op_catenc(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  for (const auto& name : string_list(args["columns"])) {
    const std::size_t c = out.column_index(name);
    const auto distinct = distinct_sorted_values(out.columns[c], true);
    std::unordered_map<std::string, std::int64_t> codes;
    for (std::size_t k = 0; k < distinct.size(); ++k)
      codes[value_key(distinct[k])] = static_cast<std::int64_t>(k);
    Column enc = Column::make(name, DataType::Int, out.n_rows);
    for (std::size_t i = 0; i < out.columns[c].size(); ++i) {
      const Value v = out.columns[c].value_at(i);
      enc.append(is_null(v) ? Value{} : Value{codes.at(value_key(v))});
    }
    out.columns[c] = std::move(enc);
  }
  return out;
}

struct Accumulator {
  std::int64_t count = 0;
  double sum = 0;
  std::int64_t isum = 0;
  Value min, max;
  std::unordered_set<std::string> uniq;
};

ColumnTable op_group(const ColumnTable& t, const json& args) {
  const auto by = string_list(args["by"]);
  std::vector<std::size_t> key_cols;
  for (const auto& name : by) key_cols.push_back(t.column_index(name));

  struct AggSpec {
    std::string out_name, fn;
    std::size_t col;
    DataType col_type;
  };
  std::vector<AggSpec> aggs;
  for (const auto& [out_name, spec] : args["aggs"].items()) {
    const std::size_t c = t.column_index(spec["col"].get<std::string>());
    aggs.push_back({out_name, spec["fn"].get<std::string>(), c, t.columns[c].type});
  }
  for (const auto& a : aggs)
    if ((a.fn == "sum" || a.fn == "mean") && a.col_type != DataType::Int &&
        a.col_type != DataType::Float)
      throw TypeMismatch("aggregation '" + a.fn + "' needs a numeric column");

  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::vector<Value>> keys;
  std::vector<std::vector<Accumulator>> accs;
  for (std::size_t r = 0; r < t.n_rows; ++r) {
    bool null_key = false;
    std::string key;
    for (const std::size_t c : key_cols) {
      if (!t.columns[c].valid[r]) {
        null_key = true;
        break;
      }
      key += value_key(t.columns[c].value_at(r));
      key += '\x02';
    }
    if (null_key) continue;
    auto [it, inserted] = group_of.emplace(key, keys.size());
    if (inserted) {
      std::vector<Value> kv;
      for (const std::size_t c : key_cols) kv.push_back(t.columns[c].value_at(r));
      keys.push_back(std::move(kv));
      accs.emplace_back(aggs.size());
    }
    auto& group = accs[it->second];
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      const Value v = t.columns[aggs[a].col].value_at(r);
      if (is_null(v)) continue;
      auto& acc = group[a];
      ++acc.count;
      const std::string& fn = aggs[a].fn;
      if (fn == "sum" || fn == "mean") {
        if (aggs[a].col_type == DataType::Int) acc.isum += std::get<std::int64_t>(v);
        else acc.sum += std::get<double>(v);
      } else if (fn == "min" || fn == "max") {
        if (is_null(acc.min) || compare_values(v, acc.min) < 0) acc.min = v;
        if (is_null(acc.max) || compare_values(v, acc.max) > 0) acc.max = v;
      } else if (fn == "nunique") {
        acc.uniq.insert(value_key(v));
      }
    }
  }

  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < keys[a].size(); ++i) {
      const int c = compare_values(keys[a][i], keys[b][i]);
      if (c != 0) return c < 0;
    }
    return false;
  });

  ColumnTable out;
  out.n_rows = keys.size();
  for (const std::size_t c : key_cols)
    out.columns.push_back(Column::make(t.columns[c].name, t.columns[c].type, keys.size()));
  for (const auto& a : aggs) {
    DataType rt;
    if (a.fn == "count" || a.fn == "nunique") rt = DataType::Int;
    else if (a.fn == "mean") rt = DataType::Float;
    else if (a.fn == "sum") rt = a.col_type == DataType::Int ? DataType::Int : DataType::Float;
    else rt = a.col_type;
    out.columns.push_back(Column::make(a.out_name, rt, keys.size()));
  }

  for (const std::size_t g : order) {
    for (std::size_t c = 0; c < key_cols.size(); ++c) out.columns[c].append(keys[g][c]);
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      auto& col = out.columns[key_cols.size() + a];
      const auto& acc = accs[g][a];
      const std::string& fn = aggs[a].fn;
      if (fn == "count") col.append(acc.count);
      else if (fn == "nunique") col.append(static_cast<std::int64_t>(acc.uniq.size()));
      else if (fn == "sum") {
        if (aggs[a].col_type == DataType::Int) col.append(acc.isum);
        else col.append(acc.sum);
      } else if (fn == "mean") {
        if (acc.count == 0) col.append(Value{});
        else
          col.append((aggs[a].col_type == DataType::Int ? static_cast<double>(acc.isum) : acc.sum) /
                     static_cast<double>(acc.count));
      } else if (fn == "min") col.append(acc.min);
      else col.append(acc.max);
    }
  }
  return out;
}

ColumnTable op_pivot(const ColumnTable& t, const json& args) {
  const std::size_t idx_c = t.column_index(args["index"].get<std::string>());
  const std::size_t col_c = t.column_index(args["columns"].get<std::string>());
  const std::size_t val_c = t.column_index(args["values"].get<std::string>());
  const std::string agg = args["agg"].get<std::string>();
  const DataType val_t = t.columns[val_c].type;
  if ((agg == "sum" || agg == "mean") && val_t != DataType::Int && val_t != DataType::Float)
    throw TypeMismatch("pivot: aggregation '" + agg + "' needs a numeric values column");

  const auto idx_vals = distinct_sorted_values(t.columns[idx_c], false);
  const auto col_vals = distinct_sorted_values(t.columns[col_c], false);
  std::unordered_map<std::string, std::size_t> idx_of, col_of;
  for (std::size_t i = 0; i < idx_vals.size(); ++i) idx_of[value_key(idx_vals[i])] = i;
  for (std::size_t i = 0; i < col_vals.size(); ++i) col_of[value_key(col_vals[i])] = i;

  std::vector<std::vector<Accumulator>> cells(idx_vals.size(),
                                              std::vector<Accumulator>(col_vals.size()));
  std::vector<std::vector<bool>> present(idx_vals.size(), std::vector<bool>(col_vals.size(), false));
  for (std::size_t r = 0; r < t.n_rows; ++r) {
    if (!t.columns[idx_c].valid[r] || !t.columns[col_c].valid[r]) continue;
    const std::size_t i = idx_of.at(value_key(t.columns[idx_c].value_at(r)));
    const std::size_t j = col_of.at(value_key(t.columns[col_c].value_at(r)));
    present[i][j] = true;
    const Value v = t.columns[val_c].value_at(r);
    if (is_null(v)) continue;
    auto& acc = cells[i][j];
    ++acc.count;
    if (val_t == DataType::Int) acc.isum += std::get<std::int64_t>(v);
    else if (val_t == DataType::Float) acc.sum += std::get<double>(v);
    if (is_null(acc.min) || compare_values(v, acc.min) < 0) acc.min = v;
    if (is_null(acc.max) || compare_values(v, acc.max) > 0) acc.max = v;
  }

  DataType cell_t;
  if (agg == "count") cell_t = DataType::Int;
  else if (agg == "mean") cell_t = DataType::Float;
  else if (agg == "sum") cell_t = val_t == DataType::Int ? DataType::Int : DataType::Float;
  else cell_t = val_t;

  ColumnTable out;
  out.n_rows = idx_vals.size();
  out.columns.push_back(Column::make(t.columns[idx_c].name, t.columns[idx_c].type, out.n_rows));
  for (const auto& cv : col_vals)
    out.columns.push_back(Column::make(render_value(cv), cell_t, out.n_rows));
  for (std::size_t i = 0; i < idx_vals.size(); ++i) {
    out.columns[0].append(idx_vals[i]);
    for (std::size_t j = 0; j < col_vals.size(); ++j) {
      auto& col = out.columns[1 + j];
      if (!present[i][j]) {
        col.append(Value{});
        continue;
      }
      const auto& acc = cells[i][j];
      if (agg == "count") col.append(acc.count);
      else if (agg == "sum") {
        if (val_t == DataType::Int) col.append(acc.isum);
        else col.append(acc.sum);
      } else if (agg == "mean") {
        if (acc.count == 0) col.append(Value{});
        else
          col.append((val_t == DataType::Int ? static_cast<double>(acc.isum) : acc.sum) /
                     static_cast<double>(acc.count));
      } else if (agg == "min") col.append(acc.min);
      else col.append(acc.max);
    }
  }
  return out;
}

ColumnTable op_join(const ColumnTable& left, const ColumnTable& right, const json& args) {
  const std::string how = args["how"].get<std::string>();
  const std::string suffix = args["suffix"].get<std::string>();
  std::vector<std::string> left_keys, right_keys;
  if (args.contains("on")) {
    left_keys = right_keys = string_list(args["on"]);
  } else if (args.contains("left_on")) {
    left_keys = string_list(args["left_on"]);
    right_keys = string_list(args["right_on"]);
  }
  std::vector<std::size_t> lk, rk;
  for (const auto& k : left_keys) lk.push_back(left.column_index(k));
  for (const auto& k : right_keys) rk.push_back(right.column_index(k));
  for (std::size_t i = 0; i < lk.size(); ++i)
    if (left.columns[lk[i]].type != right.columns[rk[i]].type)
      throw TypeMismatch("join key type mismatch on '" + left_keys[i] + "'");

  const bool shared_names = args.contains("on");
  std::vector<std::size_t> right_cols;
  std::vector<std::string> right_names;
  for (std::size_t c = 0; c < right.columns.size(); ++c) {
    if (shared_names && std::find(rk.begin(), rk.end(), c) != rk.end()) continue;
    std::string name = right.columns[c].name;
    if (left.find_column(name)) name += suffix;
    right_cols.push_back(c);
    right_names.push_back(std::move(name));
  }

  // Accumulate matched index pairs, then gather column-wise.
  std::vector<std::uint32_t> li, ri;  // ri entry UINT32_MAX = null fill
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  if (lk.empty()) {
    for (std::size_t l = 0; l < left.n_rows; ++l)
      for (std::size_t r = 0; r < right.n_rows; ++r) {
        li.push_back(static_cast<std::uint32_t>(l));
        ri.push_back(static_cast<std::uint32_t>(r));
      }
  } else {
    std::unordered_map<std::string, std::vector<std::uint32_t>> index;
    for (std::size_t r = 0; r < right.n_rows; ++r) {
      bool has_null = false;
      for (const std::size_t c : rk) has_null |= !right.columns[c].valid[r];
      if (!has_null) index[row_key(right, rk, r)].push_back(static_cast<std::uint32_t>(r));
    }
    std::vector<bool> right_matched(right.n_rows, false);
    for (std::size_t l = 0; l < left.n_rows; ++l) {
      bool has_null = false;
      for (const std::size_t c : lk) has_null |= !left.columns[c].valid[l];
      const auto it = has_null ? index.end() : index.find(row_key(left, lk, l));
      if (it != index.end()) {
        for (const std::uint32_t r : it->second) {
          right_matched[r] = true;
          li.push_back(static_cast<std::uint32_t>(l));
          ri.push_back(r);
        }
      } else if (how == "left" || how == "outer") {
        li.push_back(static_cast<std::uint32_t>(l));
        ri.push_back(kNone);
      }
    }
    if (how == "right" || how == "outer") {
      for (std::size_t r = 0; r < right.n_rows; ++r)
        if (!right_matched[r]) {
          li.push_back(kNone);
          ri.push_back(static_cast<std::uint32_t>(r));
        }
    }
  }

  ColumnTable out;
  out.n_rows = li.size();
  for (std::size_t c = 0; c < left.columns.size(); ++c) {
    const auto& src = left.columns[c];
    Column g = Column::make(src.name, src.type, li.size());
    const auto key_slot = std::find(lk.begin(), lk.end(), c);
    const bool is_key = key_slot != lk.end();
    const std::size_t rkey = is_key ? rk[static_cast<std::size_t>(key_slot - lk.begin())] : 0;
    for (std::size_t i = 0; i < li.size(); ++i) {
      if (li[i] != kNone) {
        g.append(src.value_at(li[i]));
      } else if (shared_names && is_key) {
        g.append(right.columns[rkey].value_at(ri[i]));  // surface right key values
      } else {
        g.append(Value{});
      }
    }
    out.columns.push_back(std::move(g));
  }
  for (std::size_t k = 0; k < right_cols.size(); ++k) {
    const auto& src = right.columns[right_cols[k]];
    Column g = Column::make(right_names[k], src.type, ri.size());
    for (std::size_t i = 0; i < ri.size(); ++i)
      g.append(ri[i] == kNone ? Value{} : src.value_at(ri[i]));
    out.columns.push_back(std::move(g));
  }
  return out;
}

ColumnTable op_chdate(const ColumnTable& t, const json& args) {
  const std::string name = args["column"].get<std::string>();
  const std::string to_format = args.value("to_format", "");
  ColumnTable out = t;
  const std::size_t c = out.column_index(name);
  if (out.columns[c].type == DataType::String) {
    if (!args.contains("from_format"))
      throw InvalidArgument("chdate: string column '" + name + "' requires 'from_format'");
    const std::string from_format = args["from_format"].get<std::string>();
    Column parsed = Column::make(name, DataType::Datetime, out.n_rows);
    const auto& data = std::get<std::vector<std::string>>(out.columns[c].data);
    for (std::size_t i = 0; i < out.columns[c].size(); ++i) {
      if (!out.columns[c].valid[i]) {
        parsed.append(Value{});
        continue;
      }
      const auto dt = parse_datetime(data[i], from_format);
      if (!dt)
        throw InvalidArgument("chdate: '" + data[i] + "' does not match format " + from_format);
      parsed.append(*dt);
    }
    out.columns[c] = std::move(parsed);
  } else if (out.columns[c].type != DataType::Datetime) {
    throw TypeMismatch("chdate: column '" + name + "' is neither string nor datetime");
  }
  if (!to_format.empty()) {
    Column text = Column::make(name, DataType::String, out.n_rows);
    const auto& data = std::get<std::vector<std::int64_t>>(out.columns[c].data);
    for (std::size_t i = 0; i < out.columns[c].size(); ++i) {
      if (!out.columns[c].valid[i]) text.append(Value{});
      else text.append(format_datetime(Datetime{data[i]}, to_format));
    }
    out.columns[c] = std::move(text);
  }
  return out;
}

ColumnTable op_dropna(const ColumnTable& t, const json& args) {
  std::vector<std::size_t> cols;
  if (args.contains("columns"))
    for (const auto& name : string_list(args["columns"])) cols.push_back(t.column_index(name));
  else
    for (std::size_t c = 0; c < t.columns.size(); ++c) cols.push_back(c);
  const bool all = args["how"].get<std::string>() == "all";
  std::vector<std::uint8_t> mask(t.n_rows, 0);
  for (std::size_t i = 0; i < t.n_rows; ++i) {
    std::size_t nulls = 0;
    for (const std::size_t c : cols) nulls += !t.columns[c].valid[i];
    mask[i] = all ? nulls < cols.size() : nulls == 0;
  }
  return filter_by_mask(t, mask);
}

void setcase_in_place(Column& col, const std::string& mode) {
  if (col.type != DataType::String)
    throw TypeMismatch("setcase: column '" + col.name + "' is not a string column");
  auto& data = std::get<std::vector<std::string>>(col.data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!col.valid[i]) continue;
    std::string& s = data[i];
    if (mode == "upper") {
      for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    } else if (mode == "lower") {
      for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else {
      bool word_start = true;
      for (auto& ch : s) {
        const bool alpha = std::isalpha(static_cast<unsigned char>(ch));
        if (alpha)
          ch = word_start ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
                          : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        word_start = !alpha;
      }
    }
  }
}

ColumnTable op_setcase(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  for (const auto& name : string_list(args["columns"]))
    setcase_in_place(out.columns[out.column_index(name)], args["mode"].get<std::string>());
  return out;
}

void norm_in_place(ColumnTable& t, const std::string& name) {
  const std::size_t c = t.column_index(name);
  const auto vals = sorted_numeric(t.columns[c]);
  const double lo = vals.empty() ? 0.0 : vals.front();
  const double hi = vals.empty() ? 0.0 : vals.back();
  Column normed = Column::make(name, DataType::Float, t.n_rows);
  for (std::size_t i = 0; i < t.columns[c].size(); ++i) {
    if (!t.columns[c].valid[i]) {
      normed.append(Value{});
      continue;
    }
    const double v = as_double(t.columns[c].value_at(i));
    normed.append(hi == lo ? 0.0 : (v - lo) / (hi - lo));
  }
  t.columns[c] = std::move(normed);
}

ColumnTable op_norm(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  norm_in_place(out, args["column"].get<std::string>());
  return out;
}

ColumnTable op_dedup(const ColumnTable& t, const json& args) {
  std::vector<std::size_t> cols;
  if (args.contains("columns"))
    for (const auto& name : string_list(args["columns"])) cols.push_back(t.column_index(name));
  else
    for (std::size_t c = 0; c < t.columns.size(); ++c) cols.push_back(c);
  std::unordered_set<std::string> seen;
  std::vector<std::uint8_t> mask(t.n_rows, 0);
  for (std::size_t i = 0; i < t.n_rows; ++i)
    mask[i] = seen.insert(row_key(t, cols, i)).second;
  return filter_by_mask(t, mask);
}

void fillna_in_place(ColumnTable& t, const json& args) {
  const std::string strategy = args["strategy"].get<std::string>();
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.columns) {
      const bool numeric = c.type == DataType::Int || c.type == DataType::Float;
      if ((strategy == "mean" || strategy == "median") && !numeric) continue;
      names.push_back(c.name);
    }
  }
  for (const auto& name : names) {
    const std::size_t c = t.column_index(name);
    Column& col = t.columns[c];
    if (strategy == "forward") {
      Value last{};
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (!col.valid[i]) {
          if (!is_null(last)) col.set(i, last);
        } else {
          last = col.value_at(i);
        }
      }
      continue;
    }
    Value fill{};
    if (strategy == "constant") {
      fill = coerce_to(value_from_json(args["value"]), col.type);
    } else if (strategy == "mean" || strategy == "median") {
      const auto vals = sorted_numeric(col);
      if (vals.empty()) continue;
      if (strategy == "mean") {
        double sum = 0;
        for (const double v : vals) sum += v;
        fill = sum / static_cast<double>(vals.size());
      } else {
        fill = quantile_of_sorted(vals, 0.5, QuantileMethod::SortInterpolate);
      }
      if (col.type == DataType::Int) col = cast_column(col, DataType::Float, "");
    } else {  // mode
      std::unordered_map<std::string, std::size_t> counts;
      std::unordered_map<std::string, Value> values;
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (!col.valid[i]) continue;
        const Value v = col.value_at(i);
        const std::string k = value_key(v);
        ++counts[k];
        values.emplace(k, v);
      }
      if (counts.empty()) continue;
      std::size_t best = 0;
      for (const auto& [k, n] : counts) {
        const Value& v = values.at(k);
        if (n > best || (n == best && compare_values(v, fill) < 0)) {
          best = n;
          fill = v;
        }
      }
    }
    for (std::size_t i = 0; i < col.size(); ++i)
      if (!col.valid[i]) col.set(i, fill);
  }
}

ColumnTable op_fillna(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  fillna_in_place(out, args);
  return out;
}

void replace_in_place(ColumnTable& t, const json& args) {
  const Value old_v = value_from_json(args["old"]);
  const Value new_v = value_from_json(args["new"]);
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.columns)
      if (is_null(old_v) || conforms_to(old_v, c.type)) names.push_back(c.name);
  }
  for (const auto& name : names) {
    Column& col = t.columns[t.column_index(name)];
    const Value old_c = is_null(old_v) ? old_v : coerce_to(old_v, col.type);
    const Value new_c = is_null(new_v) ? new_v : coerce_to(new_v, col.type);
    for (std::size_t i = 0; i < col.size(); ++i) {
      const bool hit = is_null(old_c) ? !col.valid[i]
                                      : col.valid[i] && values_equal(col.value_at(i), old_c);
      if (hit) col.set(i, new_c);
    }
  }
}

ColumnTable op_replace(const ColumnTable& t, const json& args) {
  ColumnTable out = t;
  replace_in_place(out, args);
  return out;
}

ColumnTable op_edit(const ColumnTable& t, const json& args) {
  const auto row = static_cast<std::size_t>(args["row"].get<std::int64_t>());
  if (row >= t.n_rows)
    throw InvalidArgument("edit: row " + std::to_string(row) + " out of range (" +
                          std::to_string(t.n_rows) + " rows)");
  ColumnTable out = t;
  Column& col = out.columns[out.column_index(args["column"].get<std::string>())];
  const Value v = value_from_json(args["value"]);
  col.set(row, is_null(v) ? v : coerce_to(v, col.type));
  return out;
}

ColumnTable op_read(const json& args) {
  const std::string path = args.value("path", "");
  if (path.empty()) throw InvalidArgument("read: no path bound (pipeline dataset missing?)");
  if (args.value("format", "csv") == "parquet") return from_rows(read_parquet(path));
  return from_rows(read_csv(path));
}

}  // namespace

ColumnTable apply_op(const ColumnTable& in, const PreparatorCall& call, const OpContext& ctx) {
  const auto& args = call.args;
  switch (call.op) {
    case Preparator::Read: return op_read(args);
    case Preparator::Write: {
      const Table rows = to_rows(in);
      if (args["format"].get<std::string>() == "parquet")
        write_parquet(rows, args["path"].get<std::string>());
      else
        write_csv(rows, args["path"].get<std::string>());
      return in;
    }
    case Preparator::IsNa: return summary_isna(in, args);
    case Preparator::Outlier: return op_outlier(in, args, ctx);
    case Preparator::SrchPtn: return op_srchptn(in, args);
    case Preparator::Sort: return op_sort(in, args);
    case Preparator::GetCols: return summary_getcols(in);
    case Preparator::DTypes: return summary_dtypes(in);
    case Preparator::Stats: return summary_stats(in, args);
    case Preparator::Query: return op_query(in, args);
    case Preparator::Cast: return op_cast(in, args);
    case Preparator::Drop: return op_drop(in, args);
    case Preparator::Rename: return op_rename(in, args);
    case Preparator::Pivot: return op_pivot(in, args);
    case Preparator::CalcCol: return op_calccol(in, args);
    case Preparator::Join: {
      if (!ctx.resolve_table) throw InvalidArgument("join requires a table resolver");
      return op_join(in, ctx.resolve_table(args["other"].get<std::string>()), args);
    }
    case Preparator::OneHot: return op_onehot(in, args);
    case Preparator::CatEnc: return op_catenc(in, args);
    case Preparator::Group: return op_group(in, args);
    case Preparator::ChDate: return op_chdate(in, args);
    case Preparator::DropNa: return op_dropna(in, args);
    case Preparator::SetCase: return op_setcase(in, args);
    case Preparator::Norm: return op_norm(in, args);
    case Preparator::Dedup: return op_dedup(in, args);
    case Preparator::FillNa: return op_fillna(in, args);
    case Preparator::Replace: return op_replace(in, args);
    case Preparator::Edit: return op_edit(in, args);
  }
  throw InvalidArgument("unknown preparator");
}

ColumnTable apply_op_owned(ColumnTable&& in, const PreparatorCall& call, const OpContext& ctx) {
  // Element-wise ops run destructively; everything else goes through the
  // const kernel.
  switch (call.op) {
    case Preparator::SetCase: {
      for (const auto& name : string_list(call.args["columns"]))
        setcase_in_place(in.columns[in.column_index(name)], call.args["mode"].get<std::string>());
      return std::move(in);
    }
    case Preparator::Norm:
      norm_in_place(in, call.args["column"].get<std::string>());
      return std::move(in);
    case Preparator::FillNa:
      fillna_in_place(in, call.args);
      return std::move(in);
    case Preparator::Replace:
      replace_in_place(in, call.args);
      return std::move(in);
    case Preparator::Rename: {
      for (const auto& [from, to] : call.args["columns"].items()) {
        const std::size_t c = in.column_index(from);
        const std::string target = to.get<std::string>();
        if (in.find_column(target) && *in.find_column(target) != c)
          throw InvalidArgument("rename: target column '" + target + "' already exists");
        in.columns[c].name = target;
      }
      return std::move(in);
    }
    case Preparator::Drop: {
      std::unordered_set<std::string> drop;
      for (const auto& name : string_list(call.args["columns"]))
        drop.insert(in.columns[in.column_index(name)].name);
      std::erase_if(in.columns, [&](const Column& c) { return drop.count(c.name) != 0; });
      return std::move(in);
    }
    default: {
      const ColumnTable& view = in;
      ColumnTable out = apply_op(view, call, ctx);
      return out;
    }
  }
}

std::optional<std::vector<ColumnSpec>> infer_schema(const std::vector<ColumnSpec>& in,
                                                    const PreparatorCall& call,
                                                    const OpContext& ctx) {
  const auto& args = call.args;
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in[i].name == name) return i;
    return std::nullopt;
  };
  switch (call.op) {
    case Preparator::Read:
    case Preparator::OneHot:
    case Preparator::Pivot: return std::nullopt;  // data-dependent
    case Preparator::Write:
    case Preparator::Outlier:
    case Preparator::SrchPtn:
    case Preparator::Sort:
    case Preparator::Query:
    case Preparator::DropNa:
    case Preparator::SetCase:
    case Preparator::Dedup:
    case Preparator::Replace:
    case Preparator::Edit: return in;
    case Preparator::GetCols: return std::vector<ColumnSpec>{{"column", DataType::String}};
    case Preparator::DTypes:
      return std::vector<ColumnSpec>{{"column", DataType::String}, {"dtype", DataType::String}};
    case Preparator::IsNa:
      return std::vector<ColumnSpec>{{"column", DataType::String}, {"null_count", DataType::Int}};
    case Preparator::Stats:
      return std::vector<ColumnSpec>{{"column", DataType::String}, {"count", DataType::Int},
                                     {"mean", DataType::Float},    {"std", DataType::Float},
                                     {"min", DataType::Float},     {"q25", DataType::Float},
                                     {"q50", DataType::Float},     {"q75", DataType::Float},
                                     {"max", DataType::Float}};
    case Preparator::Cast: {
      auto out = in;
      for (const auto& [name, type_name] : args["columns"].items()) {
        const auto c = find(name);
        if (!c) return std::nullopt;
        const auto t = data_type_from_string(type_name.get<std::string>());
        if (!t) return std::nullopt;
        out[*c].type = *t;
      }
      return out;
    }
    case Preparator::Drop: {
      auto out = in;
      for (const auto& name : string_list(args["columns"]))
        std::erase_if(out, [&](const ColumnSpec& s) { return s.name == name; });
      return out;
    }
    case Preparator::Rename: {
      auto out = in;
      for (const auto& [from, to] : args["columns"].items()) {
        const auto c = find(from);
        if (!c) return std::nullopt;
        out[*c].name = to.get<std::string>();
      }
      return out;
    }
    case Preparator::CalcCol: {
      auto out = in;
      const expr::Compiled ex(args["expr"].get<std::string>(), in);
      const auto st = ex.static_type();
      if (!st) return std::nullopt;
      const std::string name = args["column"].get<std::string>();
      if (auto c = find(name)) out[*c].type = *st;
      else out.push_back({name, *st});
      return out;
    }
    case Preparator::CatEnc: {
      auto out = in;
      for (const auto& name : string_list(args["columns"])) {
        const auto c = find(name);
        if (!c) return std::nullopt;
        out[*c].type = DataType::Int;
      }
      return out;
    }
    case Preparator::Norm: {
      auto out = in;
      const auto c = find(args["column"].get<std::string>());
      if (!c) return std::nullopt;
      out[*c].type = DataType::Float;
      return out;
    }
    case Preparator::ChDate: {
      auto out = in;
      const auto c = find(args["column"].get<std::string>());
      if (!c) return std::nullopt;
      out[*c].type = args.contains("to_format") && !args["to_format"].get<std::string>().empty()
                         ? DataType::String
                         : DataType::Datetime;
      return out;
    }
    case Preparator::FillNa: {
      auto out = in;
      const std::string strategy = args["strategy"].get<std::string>();
      if (strategy == "mean" || strategy == "median") {
        if (args.contains("columns")) {
          for (const auto& name : string_list(args["columns"])) {
            const auto c = find(name);
            if (!c) return std::nullopt;
            if (out[*c].type == DataType::Int) out[*c].type = DataType::Float;
          }
        } else {
          for (auto& s : out)
            if (s.type == DataType::Int) s.type = DataType::Float;
        }
      }
      return out;
    }
    case Preparator::Group: {
      std::vector<ColumnSpec> out;
      for (const auto& name : string_list(args["by"])) {
        const auto c = find(name);
        if (!c) return std::nullopt;
        out.push_back(in[*c]);
      }
      for (const auto& [out_name, spec] : args["aggs"].items()) {
        const auto c = find(spec["col"].get<std::string>());
        if (!c) return std::nullopt;
        const std::string fn = spec["fn"].get<std::string>();
        DataType rt;
        if (fn == "count" || fn == "nunique") rt = DataType::Int;
        else if (fn == "mean") rt = DataType::Float;
        else if (fn == "sum") rt = in[*c].type == DataType::Int ? DataType::Int : DataType::Float;
        else rt = in[*c].type;
        out.push_back({out_name, rt});
      }
      return out;
    }
    case Preparator::Join: {
      (void)ctx;
      return std::nullopt;  // needs the other side's schema
    }
  }
  return std::nullopt;
}

}  // namespace prepbench::colstore

// ---------------------------------------------------------------------------
// Adapters
// ---------------------------------------------------------------------------

namespace prepbench {

namespace {

using colstore::ColumnTable;

std::map<Preparator, CompatibilityLevel> full_support() {
  std::map<Preparator, CompatibilityLevel> m;
  for (const Preparator p : all_preparators()) m[p] = CompatibilityLevel::FullMatch;
  return m;
}

ColumnTable load_table_path(const std::string& path) {
  if (path.size() > 8 && path.compare(path.size() - 8, 8, ".parquet") == 0)
    return colstore::from_rows(read_parquet(path));
  return colstore::from_rows(read_csv(path));
}

class ColumnarAdapter final : public Adapter {
public:
  explicit ColumnarAdapter(AdapterDescriptor desc, colstore::QuantileMethod quantiles)
      : desc_(std::move(desc)), quantiles_(quantiles) {}

  const AdapterDescriptor& descriptor() const override { return desc_; }

  FrameHandle apply(const FrameHandle& in, const PreparatorCall& call) override {
    const ColumnTable* table = state_of(in);
    static const ColumnTable empty;
    if (!table) table = &empty;
    try {
      ColumnTable out = colstore::apply_op(*table, call, context());
      return wrap(std::move(out));
    } catch (const Error&) {
      throw;
    } catch (const std::bad_alloc&) {
      throw EngineError("allocation failure", /*oom=*/true);
    } catch (const std::exception& e) {
      throw EngineError(e.what());
    }
  }

  FrameHandle materialize(const FrameHandle& in) override {
    FrameHandle out = in;
    out.materialized = true;  // eager engine: nothing pending
    return out;
  }

  Table to_canonical(const FrameHandle& in) override { return colstore::to_rows(require(in)); }

  std::optional<std::vector<ColumnSpec>> schema(const FrameHandle& in) override {
    return require(in).schema();
  }

  std::size_t row_count(const FrameHandle& in) override { return require(in).n_rows; }

  FrameHandle from_table(const Table& table) override {
    return wrap(colstore::from_rows(table));
  }

  void register_table(const std::string& name, const FrameHandle& handle) override {
    session_[name] = handle;
  }

  std::optional<FrameHandle> lookup_table(const std::string& name) override {
    const auto it = session_.find(name);
    if (it == session_.end()) return std::nullopt;
    return it->second;
  }

  std::pair<double, double> column_quantiles(const FrameHandle& in, const std::string& column,
                                             double lower_q, double upper_q) override {
    const auto& t = require(in);
    const auto& col = t.columns[t.column_index(column)];
    return {colstore::column_quantile(col, lower_q, quantiles_),
            colstore::column_quantile(col, upper_q, quantiles_)};
  }

  void reset_session() override { session_.clear(); }

private:
  colstore::OpContext context() {
    colstore::OpContext ctx;
    ctx.quantiles = quantiles_;
    ctx.resolve_table = [this](const std::string& name) -> ColumnTable {
      if (auto h = lookup_table(name)) return require(*h);
      return load_table_path(name);
    };
    return ctx;
  }

  FrameHandle wrap(ColumnTable&& t) {
    FrameHandle h;
    h.state = std::make_shared<const ColumnTable>(std::move(t));
    h.materialized = true;
    return h;
  }

  const ColumnTable* state_of(const FrameHandle& h) {
    return static_cast<const ColumnTable*>(h.state.get());
  }

  const ColumnTable& require(const FrameHandle& h) {
    if (!h.valid()) throw EngineError("invalid frame handle");
    return *state_of(h);
  }

  AdapterDescriptor desc_;
  colstore::QuantileMethod quantiles_;
  std::map<std::string, FrameHandle> session_;
};

class ReferenceAdapter final : public Adapter {
public:
  ReferenceAdapter() : desc_(reference_descriptor()) {}

  const AdapterDescriptor& descriptor() const override { return desc_; }

  FrameHandle apply(const FrameHandle& in, const PreparatorCall& call) override {
    static const Table empty;
    const Table* table = in.valid() ? state_of(in) : &empty;
    if (call.op == Preparator::Join) {
      const std::string other = call.args["other"].get<std::string>();
      Table right;
      if (auto h = lookup_table(other)) right = *state_of(*h);
      else right = colstore::to_rows(load_table_path(other));
      return wrap(refeng::ref_join(*table, right, call));
    }
    ApplyResult r = refeng::ref_apply(*table, call);
    if (auto* t = std::get_if<Table>(&r)) return wrap(std::move(*t));
    return wrap(std::move(std::get<ScalarResult>(r).values));
  }

  FrameHandle materialize(const FrameHandle& in) override {
    FrameHandle out = in;
    out.materialized = true;
    return out;
  }

  Table to_canonical(const FrameHandle& in) override { return require(in); }

  std::optional<std::vector<ColumnSpec>> schema(const FrameHandle& in) override {
    return require(in).schema();
  }

  std::size_t row_count(const FrameHandle& in) override { return require(in).row_count(); }

  FrameHandle from_table(const Table& table) override { return wrap(Table(table)); }

  void register_table(const std::string& name, const FrameHandle& handle) override {
    session_[name] = handle;
  }

  std::optional<FrameHandle> lookup_table(const std::string& name) override {
    const auto it = session_.find(name);
    if (it == session_.end()) return std::nullopt;
    return it->second;
  }

  std::pair<double, double> column_quantiles(const FrameHandle& in, const std::string& column,
                                             double lower_q, double upper_q) override {
    return refeng::column_quantiles(require(in), column, lower_q, upper_q);
  }

  void reset_session() override { session_.clear(); }

private:
  FrameHandle wrap(Table&& t) {
    FrameHandle h;
    h.state = std::make_shared<const Table>(std::move(t));
    h.materialized = true;
    return h;
  }
  const Table* state_of(const FrameHandle& h) { return static_cast<const Table*>(h.state.get()); }
  const Table& require(const FrameHandle& h) {
    if (!h.valid()) throw EngineError("invalid frame handle");
    return *state_of(h);
  }

  AdapterDescriptor desc_;
  std::map<std::string, FrameHandle> session_;
};

}  // namespace

AdapterDescriptor columnar_descriptor() {
  AdapterDescriptor d;
  d.engine = {"columnar", "eager", "cpu"};
  d.supports = full_support();
  d.version = "0.1";
  d.approximate_quantiles = false;
  return d;
}

AdapterDescriptor reference_descriptor() {
  AdapterDescriptor d;
  d.engine = {"reference", "eager", "cpu"};
  d.supports = full_support();
  d.version = "0.1";
  d.approximate_quantiles = false;
  return d;
}

std::unique_ptr<Adapter> make_columnar_adapter() {
  return std::make_unique<ColumnarAdapter>(columnar_descriptor(),
                                           colstore::QuantileMethod::SortInterpolate);
}

std::unique_ptr<Adapter> make_reference_adapter() { return std::make_unique<ReferenceAdapter>(); }

}  // namespace prepbench
