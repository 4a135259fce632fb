#include "prepbench/reference_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <regex>
#include <unordered_map>

#include "prepbench/csv.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/expr.hpp"
#include "prepbench/parquet.hpp"

namespace prepbench::refeng {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& v) {
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(e.get<std::string>());
  return out;
}

std::vector<std::string> columns_or_all(const Table& t, const json& args, const char* key) {
  if (args.contains(key)) return string_list(args[key]);
  return t.column_names();
}

Value value_from_json(const json& v) {
  if (v.is_null()) return Value{};
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return v.get<double>();
  return v.get<std::string>();
}

/// Coerce a json-sourced value to a column's type where the conversion is
/// lossless-ish (int literal into a float column, ISO text into datetime).
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

std::vector<double> non_null_numeric(const Table& t, const std::string& column) {
  const std::size_t c = t.column_index(column);
  const DataType dt = t.schema()[c].type;
  if (dt != DataType::Int && dt != DataType::Float)
    throw TypeMismatch("column '" + column + "' is not numeric");
  std::vector<double> vals;
  vals.reserve(t.row_count());
  for (const auto& row : t.rows())
    if (!is_null(row[c])) vals.push_back(as_double(row[c]));
  return vals;
}

Table filter_rows(const Table& t, const std::function<bool(const std::vector<Value>&)>& pred) {
  Table out(t.schema());
  for (const auto& row : t.rows())
    if (pred(row)) out.rows().push_back(row);
  return out;
}

// -- EDA summaries ----------------------------------------------------------

ScalarResult do_getcols(const Table& t) {
  Table s({{"column", DataType::String}});
  for (const auto& c : t.schema()) s.rows().push_back({c.name});
  return {std::move(s)};
}

ScalarResult do_dtypes(const Table& t) {
  Table s({{"column", DataType::String}, {"dtype", DataType::String}});
  for (const auto& c : t.schema()) s.rows().push_back({c.name, std::string(to_string(c.type))});
  return {std::move(s)};
}

ScalarResult do_isna(const Table& t, const json& args) {
  Table s({{"column", DataType::String}, {"null_count", DataType::Int}});
  for (const auto& name : columns_or_all(t, args, "columns")) {
    const std::size_t c = t.column_index(name);
    std::int64_t nulls = 0;
    for (const auto& row : t.rows()) nulls += is_null(row[c]);
    s.rows().push_back({name, nulls});
  }
  return {std::move(s)};
}

ScalarResult do_stats(const Table& t, const json& args) {
  Table s({{"column", DataType::String},
           {"count", DataType::Int},
           {"mean", DataType::Float},
           {"std", DataType::Float},
           {"min", DataType::Float},
           {"q25", DataType::Float},
           {"q50", DataType::Float},
           {"q75", DataType::Float},
           {"max", DataType::Float}});
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.schema())
      if (c.type == DataType::Int || c.type == DataType::Float) names.push_back(c.name);
  }
  for (const auto& name : names) {
    std::vector<double> vals = non_null_numeric(t, name);
    std::sort(vals.begin(), vals.end());
    const std::int64_t n = static_cast<std::int64_t>(vals.size());
    std::vector<Value> row{name, n};
    if (n == 0) {
      row.insert(row.end(), 7, Value{});
    } else {
      double sum = 0;
      for (const double v : vals) sum += v;
      const double mean = sum / static_cast<double>(n);
      Value std_dev{};
      if (n > 1) {
        double ss = 0;
        for (const double v : vals) ss += (v - mean) * (v - mean);
        std_dev = std::sqrt(ss / static_cast<double>(n - 1));  // n-1 denominator
      }
      row.push_back(mean);
      row.push_back(std_dev);
      row.push_back(vals.front());
      row.push_back(exact_quantile(vals, 0.25));
      row.push_back(exact_quantile(vals, 0.50));
      row.push_back(exact_quantile(vals, 0.75));
      row.push_back(vals.back());
    }
    s.rows().push_back(std::move(row));
  }
  return {std::move(s)};
}

// -- frame-valued preparators ------------------------------------------------

Table do_outlier(const Table& t, const json& args) {
  const std::string column = args["column"].get<std::string>();
  const auto [lo, hi] = outlier_fences(t, column, args["lower_quantile"].get<double>(),
                                       args["upper_quantile"].get<double>(),
                                       args["iqr_multiplier"].get<double>());
  const std::size_t c = t.column_index(column);
  if (std::isnan(lo)) return Table(t.schema());  // all-null column: nothing to flag
  return filter_rows(t, [&](const auto& row) {
    if (is_null(row[c])) return false;
    const double v = as_double(row[c]);
    return v < lo || v > hi;
  });
}

Table do_srchptn(const Table& t, const json& args) {
  const std::size_t c = t.column_index(args["column"].get<std::string>());
  if (t.schema()[c].type != DataType::String)
    throw TypeMismatch("srchptn column must be a string column");
  const std::string pattern = args["pattern"].get<std::string>();
  if (args["regex"].get<bool>()) {
    const std::regex re(pattern);
    return filter_rows(t, [&](const auto& row) {
      return !is_null(row[c]) && std::regex_search(std::get<std::string>(row[c]), re);
    });
  }
  return filter_rows(t, [&](const auto& row) {
    return !is_null(row[c]) && std::get<std::string>(row[c]).find(pattern) != std::string::npos;
  });
}

Table do_sort(const Table& t, const json& args) {
  const auto by = string_list(args["by"]);
  std::vector<std::size_t> cols;
  for (const auto& name : by) cols.push_back(t.column_index(name));
  std::vector<bool> asc(by.size(), true);
  if (args["ascending"].is_boolean()) {
    asc.assign(by.size(), args["ascending"].get<bool>());
  } else {
    const auto& arr = args["ascending"];
    if (arr.size() != by.size())
      throw InvalidArgument("sort: 'ascending' list length must match 'by'");
    for (std::size_t i = 0; i < by.size(); ++i) asc[i] = arr[i].get<bool>();
  }

  std::vector<std::size_t> idx(t.row_count());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Value& va = t.at(a, cols[k]);
      const Value& vb = t.at(b, cols[k]);
      // Nulls always sort last, independent of direction.
      if (is_null(va) || is_null(vb)) {
        if (is_null(va) && is_null(vb)) continue;
        return is_null(vb);
      }
      const int c = compare_values(va, vb);
      if (c != 0) return asc[k] ? c < 0 : c > 0;
    }
    return false;
  });

  Table out(t.schema());
  out.rows().reserve(t.row_count());
  for (const std::size_t i : idx) out.rows().push_back(t.row(i));
  return out;
}

Table do_query(const Table& t, const json& args) {
  const expr::Compiled pred(args["expr"].get<std::string>(), t.schema());
  return filter_rows(t, [&](const auto& row) { return pred.matches(row); });
}

Value cast_value(const Value& v, DataType from, DataType to, const std::string& format) {
  if (is_null(v)) return v;
  if (from == to) return v;
  switch (to) {
    case DataType::Int:
      switch (from) {
        case DataType::Float: return static_cast<std::int64_t>(std::trunc(std::get<double>(v)));
        case DataType::Bool: return static_cast<std::int64_t>(std::get<bool>(v) ? 1 : 0);
        case DataType::String: {
          const auto& s = std::get<std::string>(v);
          try {
            std::size_t used = 0;
            const std::int64_t r = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return r;
          } catch (const std::exception&) {
            throw TypeMismatch("cannot cast '" + s + "' to int");
          }
        }
        case DataType::Datetime: return std::get<Datetime>(v).millis;
        default: break;
      }
      break;
    case DataType::Float:
      switch (from) {
        case DataType::Int: return static_cast<double>(std::get<std::int64_t>(v));
        case DataType::Bool: return std::get<bool>(v) ? 1.0 : 0.0;
        case DataType::String: {
          const auto& s = std::get<std::string>(v);
          try {
            std::size_t used = 0;
            const double r = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return r;
          } catch (const std::exception&) {
            throw TypeMismatch("cannot cast '" + s + "' to float");
          }
        }
        default: break;
      }
      break;
    case DataType::Bool:
      switch (from) {
        case DataType::Int: return std::get<std::int64_t>(v) != 0;
        case DataType::Float: return std::get<double>(v) != 0.0;
        case DataType::String: {
          const auto& s = std::get<std::string>(v);
          if (s == "true" || s == "True" || s == "TRUE") return true;
          if (s == "false" || s == "False" || s == "FALSE") return false;
          throw TypeMismatch("cannot cast '" + s + "' to bool");
        }
        default: break;
      }
      break;
    case DataType::String:
      if (from == DataType::Datetime && !format.empty())
        return format_datetime(std::get<Datetime>(v), format);
      return render_value(v);
    case DataType::Datetime:
      if (from == DataType::String) {
        const auto& s = std::get<std::string>(v);
        const std::string fmt = format.empty() ? "%Y-%m-%d" : format;
        if (auto dt = parse_datetime(s, fmt)) return *dt;
        throw TypeMismatch("cannot parse '" + s + "' as datetime with format " + fmt);
      }
      if (from == DataType::Int) return Datetime{std::get<std::int64_t>(v)};
      break;
  }
  throw TypeMismatch(std::string("unsupported cast ") + to_string(from) + " -> " + to_string(to));
}

Table do_cast(const Table& t, const json& args) {
  const std::string format = args.value("format", "");
  Table out = t;
  for (const auto& [name, type_name] : args["columns"].items()) {
    const std::size_t c = out.column_index(name);
    const auto to = data_type_from_string(type_name.get<std::string>());
    if (!to) throw InvalidArgument("cast: unknown type '" + type_name.get<std::string>() + "'");
    const DataType from = out.schema()[c].type;
    for (auto& row : out.rows()) row[c] = cast_value(row[c], from, *to, format);
    out.schema()[c].type = *to;
  }
  return out;
}

Table do_drop(const Table& t, const json& args) {
  std::vector<std::size_t> drop;
  for (const auto& name : string_list(args["columns"])) drop.push_back(t.column_index(name));
  std::vector<bool> keep(t.column_count(), true);
  for (const std::size_t c : drop) keep[c] = false;

  Table out;
  for (std::size_t c = 0; c < t.column_count(); ++c)
    if (keep[c]) out.schema().push_back(t.schema()[c]);
  out.rows().reserve(t.row_count());
  for (const auto& row : t.rows()) {
    std::vector<Value> r;
    r.reserve(out.column_count());
    for (std::size_t c = 0; c < row.size(); ++c)
      if (keep[c]) r.push_back(row[c]);
    out.rows().push_back(std::move(r));
  }
  return out;
}

Table do_rename(const Table& t, const json& args) {
  Table out = t;
  for (const auto& [from, to] : args["columns"].items()) {
    const std::size_t c = out.column_index(from);
    const std::string target = to.get<std::string>();
    if (out.has_column(target) && out.column_index(target) != c)
      throw InvalidArgument("rename: target column '" + target + "' already exists");
    out.schema()[c].name = target;
  }
  return out;
}

Table do_calccol(const Table& t, const json& args) {
  const std::string name = args["column"].get<std::string>();
  const expr::Compiled ex(args["expr"].get<std::string>(), t.schema());

  std::vector<Value> values;
  values.reserve(t.row_count());
  for (const auto& row : t.rows()) values.push_back(ex.eval(row));

  DataType type = DataType::Float;
  if (auto st = ex.static_type()) {
    type = *st;
  } else {
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
    if (!any) type = DataType::Float;
    else if (all_int) type = DataType::Int;
    else if (all_numeric) type = DataType::Float;
    else if (other && !all_numeric && !all_int) {
      bool saw_numeric = false;
      for (const auto& v : values)
        if (!is_null(v) && (type_of(v) == DataType::Int || type_of(v) == DataType::Float))
          saw_numeric = true;
      if (saw_numeric) throw TypeMismatch("calccol produced mixed value types");
      type = *other;
    }
  }
  if (type == DataType::Float)
    for (auto& v : values)
      if (!is_null(v) && std::holds_alternative<std::int64_t>(v))
        v = static_cast<double>(std::get<std::int64_t>(v));

  Table out = t;
  if (auto existing = out.find_column(name)) {
    out.schema()[*existing].type = type;
    for (std::size_t i = 0; i < out.row_count(); ++i) out.at(i, *existing) = std::move(values[i]);
  } else {
    out.schema().push_back({name, type});
    for (std::size_t i = 0; i < out.row_count(); ++i) out.rows()[i].push_back(std::move(values[i]));
  }
  return out;
}

Table do_onehot(const Table& t, const json& args) {
  Table out = t;
  for (const auto& name : string_list(args["columns"])) {
    const std::size_t c = out.column_index(name);
    std::vector<Value> distinct;
    for (const auto& row : out.rows()) {
      if (is_null(row[c])) continue;
      bool found = false;
      for (const auto& d : distinct)
        if (values_equal(d, row[c])) { found = true; break; }
      if (!found) distinct.push_back(row[c]);
    }
    std::sort(distinct.begin(), distinct.end(),
              [](const Value& a, const Value& b) { return compare_values(a, b) < 0; });

    Table next;
    for (std::size_t k = 0; k < out.column_count(); ++k)
      if (k != c) next.schema().push_back(out.schema()[k]);
    for (const auto& d : distinct) next.schema().push_back({name + "=" + render_value(d), DataType::Int});
    next.rows().reserve(out.row_count());
    for (const auto& row : out.rows()) {
      std::vector<Value> r;
      r.reserve(next.column_count());
      for (std::size_t k = 0; k < row.size(); ++k)
        if (k != c) r.push_back(row[k]);
      for (const auto& d : distinct)
        r.push_back(static_cast<std::int64_t>(!is_null(row[c]) && values_equal(row[c], d) ? 1 : 0));
      next.rows().push_back(std::move(r));
    }
    out = std::move(next);
  }
  return out;
}

Table do_catenc(const Table& t, const json& args) {
  Table out = t;
  for (const auto& name : string_list(args["columns"])) {
    const std::size_t c = out.column_index(name);
    std::vector<Value> distinct;
    for (const auto& row : out.rows()) {
      if (is_null(row[c])) continue;
      bool found = false;
      for (const auto& d : distinct)
        if (values_equal(d, row[c])) { found = true; break; }
      if (!found) distinct.push_back(row[c]);
    }
    // Codes follow ascending lexicographic order of the rendered values.
    std::sort(distinct.begin(), distinct.end(), [](const Value& a, const Value& b) {
      return render_value(a) < render_value(b);
    });
    std::map<std::string, std::int64_t> codes;
    for (std::size_t k = 0; k < distinct.size(); ++k)
      codes[render_value(distinct[k])] = static_cast<std::int64_t>(k);
    for (auto& row : out.rows())
      row[c] = is_null(row[c]) ? Value{} : Value{codes.at(render_value(row[c]))};
    out.schema()[c].type = DataType::Int;
  }
  return out;
}

struct GroupAgg {
  std::string out_name;
  std::string fn;
  std::size_t col = 0;
  DataType col_type = DataType::Float;
};

DataType agg_result_type(const GroupAgg& a) {
  if (a.fn == "count" || a.fn == "nunique") return DataType::Int;
  if (a.fn == "mean") return DataType::Float;
  if (a.fn == "sum") return a.col_type == DataType::Int ? DataType::Int : DataType::Float;
  return a.col_type;  // min / max preserve the column type
}

Value aggregate_group(const GroupAgg& agg, const Table& t, const std::vector<std::size_t>& rows) {
  if (agg.fn == "count") {
    std::int64_t n = 0;
    for (const std::size_t r : rows) n += !is_null(t.at(r, agg.col));
    return n;
  }
  if (agg.fn == "nunique") {
    std::vector<Value> distinct;
    for (const std::size_t r : rows) {
      const Value& v = t.at(r, agg.col);
      if (is_null(v)) continue;
      bool found = false;
      for (const auto& d : distinct)
        if (values_equal(d, v)) { found = true; break; }
      if (!found) distinct.push_back(v);
    }
    return static_cast<std::int64_t>(distinct.size());
  }
  if (agg.fn == "min" || agg.fn == "max") {
    Value best{};
    for (const std::size_t r : rows) {
      const Value& v = t.at(r, agg.col);
      if (is_null(v)) continue;
      if (is_null(best) || (agg.fn == "min" ? compare_values(v, best) < 0
                                            : compare_values(v, best) > 0))
        best = v;
    }
    return best;
  }
  // sum / mean over the non-null numeric values.
  if (agg.col_type != DataType::Int && agg.col_type != DataType::Float)
    throw TypeMismatch("aggregation '" + agg.fn + "' needs a numeric column");
  double sum = 0;
  std::int64_t isum = 0;
  std::int64_t n = 0;
  for (const std::size_t r : rows) {
    const Value& v = t.at(r, agg.col);
    if (is_null(v)) continue;
    ++n;
    if (agg.col_type == DataType::Int) isum += std::get<std::int64_t>(v);
    else sum += std::get<double>(v);
  }
  if (agg.fn == "sum") {
    if (agg.col_type == DataType::Int) return isum;
    return sum;
  }
  // mean
  if (n == 0) return Value{};
  const double total = agg.col_type == DataType::Int ? static_cast<double>(isum) : sum;
  return total / static_cast<double>(n);
}

Table do_group(const Table& t, const json& args) {
  const auto by = string_list(args["by"]);
  std::vector<std::size_t> key_cols;
  for (const auto& name : by) key_cols.push_back(t.column_index(name));

  std::vector<GroupAgg> aggs;
  for (const auto& [out_name, spec] : args["aggs"].items()) {
    GroupAgg a;
    a.out_name = out_name;
    a.fn = spec["fn"].get<std::string>();
    a.col = t.column_index(spec["col"].get<std::string>());
    a.col_type = t.schema()[a.col].type;
    aggs.push_back(std::move(a));
  }
  // json object iteration is alphabetical; emitted columns follow that order.

  // Group rows; rows with a null group key are excluded.
  std::map<std::vector<std::string>, std::vector<std::size_t>> groups;
  std::map<std::vector<std::string>, std::vector<Value>> key_values;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    bool null_key = false;
    std::vector<std::string> key;
    std::vector<Value> kv;
    key.reserve(key_cols.size());
    for (const std::size_t c : key_cols) {
      const Value& v = t.at(r, c);
      if (is_null(v)) { null_key = true; break; }
      key.push_back(value_key(v));
      kv.push_back(v);
    }
    if (null_key) continue;
    groups[key].push_back(r);
    key_values.emplace(key, std::move(kv));
  }

  Table out;
  for (const std::size_t c : key_cols) out.schema().push_back(t.schema()[c]);
  for (const auto& a : aggs) out.schema().push_back({a.out_name, agg_result_type(a)});

  // std::map keeps groups in rendered-key order; re-sort by actual values so
  // numeric keys order numerically.
  std::vector<const std::vector<std::string>*> order;
  for (const auto& [k, rows] : groups) order.push_back(&k);
  std::sort(order.begin(), order.end(), [&](const auto* a, const auto* b) {
    const auto& ka = key_values.at(*a);
    const auto& kb = key_values.at(*b);
    for (std::size_t i = 0; i < ka.size(); ++i) {
      const int c = compare_values(ka[i], kb[i]);
      if (c != 0) return c < 0;
    }
    return false;
  });

  for (const auto* k : order) {
    const auto& rows = groups.at(*k);
    std::vector<Value> r = key_values.at(*k);
    for (const auto& a : aggs) {
      Value v = aggregate_group(a, t, rows);
      if (!is_null(v) && agg_result_type(a) == DataType::Float &&
          std::holds_alternative<std::int64_t>(v))
        v = static_cast<double>(std::get<std::int64_t>(v));
      r.push_back(std::move(v));
    }
    out.rows().push_back(std::move(r));
  }
  return out;
}

Table do_chdate(const Table& t, const json& args) {
  const std::string name = args["column"].get<std::string>();
  const std::size_t c = t.column_index(name);
  const DataType from = t.schema()[c].type;
  const std::string to_format = args.value("to_format", "");

  Table out = t;
  if (from == DataType::String) {
    if (!args.contains("from_format"))
      throw InvalidArgument("chdate: string column '" + name + "' requires 'from_format'");
    const std::string from_format = args["from_format"].get<std::string>();
    for (auto& row : out.rows()) {
      if (is_null(row[c])) continue;
      const auto dt = parse_datetime(std::get<std::string>(row[c]), from_format);
      if (!dt)
        throw InvalidArgument("chdate: '" + std::get<std::string>(row[c]) +
                              "' does not match format " + from_format);
      row[c] = *dt;
    }
    out.schema()[c].type = DataType::Datetime;
  } else if (from != DataType::Datetime) {
    throw TypeMismatch("chdate: column '" + name + "' is neither string nor datetime");
  }
  if (!to_format.empty()) {
    for (auto& row : out.rows())
      if (!is_null(row[c])) row[c] = format_datetime(std::get<Datetime>(row[c]), to_format);
    out.schema()[c].type = DataType::String;
  }
  return out;
}

Table do_dropna(const Table& t, const json& args) {
  std::vector<std::size_t> cols;
  for (const auto& name : columns_or_all(t, args, "columns")) cols.push_back(t.column_index(name));
  const bool all = args["how"].get<std::string>() == "all";
  return filter_rows(t, [&](const auto& row) {
    std::size_t nulls = 0;
    for (const std::size_t c : cols) nulls += is_null(row[c]);
    return all ? nulls < cols.size() : nulls == 0;
  });
}

Table do_setcase(const Table& t, const json& args) {
  const std::string mode = args["mode"].get<std::string>();
  Table out = t;
  for (const auto& name : string_list(args["columns"])) {
    const std::size_t c = out.column_index(name);
    if (out.schema()[c].type != DataType::String)
      throw TypeMismatch("setcase: column '" + name + "' is not a string column");
    for (auto& row : out.rows()) {
      if (is_null(row[c])) continue;
      std::string s = std::get<std::string>(row[c]);
      if (mode == "upper") {
        for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      } else if (mode == "lower") {
        for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else {  // title
        bool word_start = true;
        for (auto& ch : s) {
          const bool alpha = std::isalpha(static_cast<unsigned char>(ch));
          ch = alpha ? (word_start ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
                                   : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))))
                     : ch;
          word_start = !alpha;
        }
      }
      row[c] = std::move(s);
    }
  }
  return out;
}

Table do_norm(const Table& t, const json& args) {
  const std::string name = args["column"].get<std::string>();
  const std::size_t c = t.column_index(name);
  const auto vals = non_null_numeric(t, name);
  double lo = 0, hi = 0;
  if (!vals.empty()) {
    lo = *std::min_element(vals.begin(), vals.end());
    hi = *std::max_element(vals.begin(), vals.end());
  }
  Table out = t;
  out.schema()[c].type = DataType::Float;
  for (auto& row : out.rows()) {
    if (is_null(row[c])) continue;
    const double v = as_double(row[c]);
    row[c] = hi == lo ? 0.0 : (v - lo) / (hi - lo);
  }
  return out;
}

Table do_dedup(const Table& t, const json& args) {
  std::vector<std::size_t> cols;
  for (const auto& name : columns_or_all(t, args, "columns")) cols.push_back(t.column_index(name));
  // Null cells compare equal to each other for the duplicate definition.
  auto key_of = [&](const std::vector<Value>& row) {
    std::string key;
    for (const std::size_t c : cols) {
      key += value_key(row[c]);
      key += '\x02';
    }
    return key;
  };
  std::unordered_map<std::string, bool> seen;
  Table out(t.schema());
  for (const auto& row : t.rows()) {
    auto [it, inserted] = seen.emplace(key_of(row), true);
    if (inserted) out.rows().push_back(row);  // keep first occurrence
  }
  return out;
}

Table do_fillna(const Table& t, const json& args) {
  const std::string strategy = args["strategy"].get<std::string>();
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.schema()) {
      const bool numeric = c.type == DataType::Int || c.type == DataType::Float;
      if (strategy == "mean" || strategy == "median") {
        if (numeric) names.push_back(c.name);
      } else {
        names.push_back(c.name);
      }
    }
  }

  Table out = t;
  for (const auto& name : names) {
    const std::size_t c = out.column_index(name);
    const DataType type = out.schema()[c].type;
    if (strategy == "forward") {
      Value last{};
      for (auto& row : out.rows()) {
        if (is_null(row[c])) row[c] = last;
        else last = row[c];
      }
      continue;
    }
    Value fill{};
    if (strategy == "constant") {
      fill = coerce_to(value_from_json(args["value"]), type);
    } else if (strategy == "mean" || strategy == "median") {
      auto vals = non_null_numeric(out, name);
      if (vals.empty()) continue;
      if (strategy == "mean") {
        double sum = 0;
        for (const double v : vals) sum += v;
        fill = sum / static_cast<double>(vals.size());
      } else {
        std::sort(vals.begin(), vals.end());
        fill = exact_quantile(vals, 0.5);
      }
      if (type == DataType::Int) {
        // Filling an int column promotes it to float (the fill is fractional).
        out.schema()[c].type = DataType::Float;
        for (auto& row : out.rows())
          if (!is_null(row[c]))
            row[c] = static_cast<double>(std::get<std::int64_t>(row[c]));
      }
    } else {  // mode: most frequent non-null value, smallest value on ties
      std::map<std::string, std::pair<std::size_t, Value>> counts;
      for (const auto& row : out.rows()) {
        if (is_null(row[c])) continue;
        auto& slot = counts[render_value(row[c])];
        slot.first += 1;
        slot.second = row[c];
      }
      std::size_t best = 0;
      for (const auto& [k, slot] : counts) {
        if (slot.first > best ||
            (slot.first == best && !is_null(fill) && compare_values(slot.second, fill) < 0)) {
          best = slot.first;
          fill = slot.second;
        }
      }
      if (counts.empty()) continue;
    }
    for (auto& row : out.rows())
      if (is_null(row[c])) row[c] = fill;
  }
  return out;
}

Table do_replace(const Table& t, const json& args) {
  const Value old_v = value_from_json(args["old"]);
  const Value new_v = value_from_json(args["new"]);
  std::vector<std::string> names;
  if (args.contains("columns")) {
    names = string_list(args["columns"]);
  } else {
    for (const auto& c : t.schema())
      if (is_null(old_v) || conforms_to(old_v, c.type)) names.push_back(c.name);
  }
  Table out = t;
  for (const auto& name : names) {
    const std::size_t c = out.column_index(name);
    const DataType type = out.schema()[c].type;
    const Value old_c = is_null(old_v) ? old_v : coerce_to(old_v, type);
    const Value new_c = is_null(new_v) ? new_v : coerce_to(new_v, type);
    for (auto& row : out.rows()) {
      const bool hit = is_null(old_c) ? is_null(row[c])
                                      : !is_null(row[c]) && values_equal(row[c], old_c);
      if (hit) row[c] = new_c;
    }
  }
  return out;
}

Table do_edit(const Table& t, const json& args) {
  const auto row_idx = static_cast<std::size_t>(args["row"].get<std::int64_t>());
  if (row_idx >= t.row_count())
    throw InvalidArgument("edit: row " + std::to_string(row_idx) + " out of range (" +
                          std::to_string(t.row_count()) + " rows)");
  const std::size_t c = t.column_index(args["column"].get<std::string>());
  Table out = t;
  const Value v = value_from_json(args["value"]);
  out.at(row_idx, c) = is_null(v) ? v : coerce_to(v, out.schema()[c].type);
  return out;
}

Table do_read(const json& args) {
  const std::string path = args.value("path", "");
  if (path.empty()) throw InvalidArgument("read: no path bound (pipeline dataset missing?)");
  const std::string format = args.value("format", "csv");
  if (format == "parquet") return read_parquet(path);
  return read_csv(path);
}

Table do_write(const Table& t, const json& args) {
  const std::string path = args["path"].get<std::string>();
  const std::string format = args["format"].get<std::string>();
  if (format == "parquet") write_parquet(t, path);
  else write_csv(t, path);
  return t;
}

}  // namespace

double exact_quantile(std::vector<double> sorted_values, double q) {
  if (sorted_values.empty()) return std::nan("");
  if (sorted_values.size() == 1) return sorted_values[0];
  const double h = q * static_cast<double>(sorted_values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = h - std::floor(h);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

std::pair<double, double> column_quantiles(const Table& table, const std::string& column,
                                           double lower_q, double upper_q) {
  auto vals = non_null_numeric(table, column);
  std::sort(vals.begin(), vals.end());
  return {exact_quantile(vals, lower_q), exact_quantile(vals, upper_q)};
}

std::pair<double, double> outlier_fences(const Table& table, const std::string& column,
                                         double lower_q, double upper_q, double iqr_mult) {
  const auto [qlo, qhi] = column_quantiles(table, column, lower_q, upper_q);
  const double iqr = qhi - qlo;
  return {qlo - iqr_mult * iqr, qhi + iqr_mult * iqr};
}

ApplyResult ref_apply(const Table& table, const PreparatorCall& call) {
  const auto& args = call.args;
  switch (call.op) {
    case Preparator::Read: return do_read(args);
    case Preparator::Write: return do_write(table, args);
    case Preparator::IsNa: return do_isna(table, args);
    case Preparator::Outlier: return do_outlier(table, args);
    case Preparator::SrchPtn: return do_srchptn(table, args);
    case Preparator::Sort: return do_sort(table, args);
    case Preparator::GetCols: return do_getcols(table);
    case Preparator::DTypes: return do_dtypes(table);
    case Preparator::Stats: return do_stats(table, args);
    case Preparator::Query: return do_query(table, args);
    case Preparator::Cast: return do_cast(table, args);
    case Preparator::Drop: return do_drop(table, args);
    case Preparator::Rename: return do_rename(table, args);
    case Preparator::Pivot:
      return ref_pivot(table, args["index"].get<std::string>(),
                       args["columns"].get<std::string>(), args["values"].get<std::string>(),
                       args["agg"].get<std::string>());
    case Preparator::CalcCol: return do_calccol(table, args);
    case Preparator::Join:
      throw InvalidArgument("ref_apply cannot resolve join tables; use ref_join");
    case Preparator::OneHot: return do_onehot(table, args);
    case Preparator::CatEnc: return do_catenc(table, args);
    case Preparator::Group: return do_group(table, args);
    case Preparator::ChDate: return do_chdate(table, args);
    case Preparator::DropNa: return do_dropna(table, args);
    case Preparator::SetCase: return do_setcase(table, args);
    case Preparator::Norm: return do_norm(table, args);
    case Preparator::Dedup: return do_dedup(table, args);
    case Preparator::FillNa: return do_fillna(table, args);
    case Preparator::Replace: return do_replace(table, args);
    case Preparator::Edit: return do_edit(table, args);
  }
  throw InvalidArgument("unknown preparator");
}

Table ref_join(const Table& left, const Table& right, const PreparatorCall& call) {
  const auto& args = call.args;
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
  for (std::size_t i = 0; i < lk.size(); ++i) {
    const DataType lt = left.schema()[lk[i]].type;
    const DataType rt = right.schema()[rk[i]].type;
    if (lt != rt)
      throw TypeMismatch("join key type mismatch on '" + left_keys[i] + "' (" + to_string(lt) +
                         " vs " + to_string(rt) + ")");
  }

  // Right columns kept: everything except the join keys when joining `on`
  // shared names; collide with a left name -> suffix.
  const bool shared_names = args.contains("on");
  std::vector<std::size_t> right_cols;
  std::vector<std::string> right_names;
  for (std::size_t c = 0; c < right.column_count(); ++c) {
    if (shared_names &&
        std::find(rk.begin(), rk.end(), c) != rk.end())
      continue;
    std::string name = right.schema()[c].name;
    if (left.has_column(name)) name += suffix;
    right_cols.push_back(c);
    right_names.push_back(std::move(name));
  }

  Table out;
  for (const auto& c : left.schema()) out.schema().push_back(c);
  for (std::size_t i = 0; i < right_cols.size(); ++i)
    out.schema().push_back({right_names[i], right.schema()[right_cols[i]].type});

  auto key_of = [](const Table& t, const std::vector<std::size_t>& cols, std::size_t r,
                   bool& has_null) {
    std::string key;
    has_null = false;
    for (const std::size_t c : cols) {
      const Value& v = t.at(r, c);
      if (is_null(v)) { has_null = true; return key; }
      key += value_key(v);
      key += '\x02';
    }
    return key;
  };

  // Cross join when no keys are given.
  if (lk.empty()) {
    for (std::size_t l = 0; l < left.row_count(); ++l)
      for (std::size_t r = 0; r < right.row_count(); ++r) {
        std::vector<Value> row = left.row(l);
        for (const std::size_t c : right_cols) row.push_back(right.at(r, c));
        out.rows().push_back(std::move(row));
      }
    return out;
  }

  std::unordered_map<std::string, std::vector<std::size_t>> index;
  for (std::size_t r = 0; r < right.row_count(); ++r) {
    bool has_null = false;
    const std::string key = key_of(right, rk, r, has_null);
    if (!has_null) index[key].push_back(r);  // null keys never match
  }

  std::vector<bool> right_matched(right.row_count(), false);
  for (std::size_t l = 0; l < left.row_count(); ++l) {
    bool has_null = false;
    const std::string key = key_of(left, lk, l, has_null);
    const auto it = has_null ? index.end() : index.find(key);
    if (it != index.end()) {
      for (const std::size_t r : it->second) {
        right_matched[r] = true;
        std::vector<Value> row = left.row(l);
        for (const std::size_t c : right_cols) row.push_back(right.at(r, c));
        out.rows().push_back(std::move(row));
      }
    } else if (how == "left" || how == "outer") {
      std::vector<Value> row = left.row(l);
      row.resize(row.size() + right_cols.size());
      out.rows().push_back(std::move(row));
    }
  }
  if (how == "right" || how == "outer") {
    for (std::size_t r = 0; r < right.row_count(); ++r) {
      if (right_matched[r]) continue;
      std::vector<Value> row(left.column_count());
      // Shared key names surface the right side's key values.
      if (shared_names)
        for (std::size_t i = 0; i < lk.size(); ++i) row[lk[i]] = right.at(r, rk[i]);
      for (const std::size_t c : right_cols) row.push_back(right.at(r, c));
      out.rows().push_back(std::move(row));
    }
  }
  return out;
}

Table ref_pivot(const Table& table, const std::string& index, const std::string& columns,
                const std::string& values, const std::string& agg) {
  const std::size_t idx_c = table.column_index(index);
  const std::size_t col_c = table.column_index(columns);
  const std::size_t val_c = table.column_index(values);
  const DataType val_t = table.schema()[val_c].type;
  if ((agg == "sum" || agg == "mean") && val_t != DataType::Int && val_t != DataType::Float)
    throw TypeMismatch("pivot: aggregation '" + agg + "' needs a numeric values column");

  std::vector<Value> idx_vals, col_vals;
  auto add_distinct = [](std::vector<Value>& set, const Value& v) {
    for (const auto& d : set)
      if (values_equal(d, v)) return;
    set.push_back(v);
  };
  for (const auto& row : table.rows()) {
    if (!is_null(row[idx_c])) add_distinct(idx_vals, row[idx_c]);
    if (!is_null(row[col_c])) add_distinct(col_vals, row[col_c]);
  }
  auto by_value = [](const Value& a, const Value& b) { return compare_values(a, b) < 0; };
  std::sort(idx_vals.begin(), idx_vals.end(), by_value);
  std::sort(col_vals.begin(), col_vals.end(), by_value);

  GroupAgg cell_agg{"", agg, val_c, val_t};
  const DataType cell_t = agg_result_type(cell_agg);

  Table out;
  out.schema().push_back(table.schema()[idx_c]);
  for (const auto& cv : col_vals) out.schema().push_back({render_value(cv), cell_t});

  for (const auto& iv : idx_vals) {
    std::vector<Value> row{iv};
    for (const auto& cv : col_vals) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < table.row_count(); ++r)
        if (!is_null(table.at(r, idx_c)) && values_equal(table.at(r, idx_c), iv) &&
            !is_null(table.at(r, col_c)) && values_equal(table.at(r, col_c), cv))
          rows.push_back(r);
      if (rows.empty()) {
        row.push_back(Value{});  // missing combination
      } else {
        Value v = aggregate_group(cell_agg, table, rows);
        if (!is_null(v) && cell_t == DataType::Float && std::holds_alternative<std::int64_t>(v))
          v = static_cast<double>(std::get<std::int64_t>(v));
        row.push_back(std::move(v));
      }
    }
    out.rows().push_back(std::move(row));
  }
  return out;
}

bool threads_state(Preparator p) {
  switch (p) {
    case Preparator::IsNa:
    case Preparator::Outlier:
    case Preparator::SrchPtn:
    case Preparator::GetCols:
    case Preparator::DTypes:
    case Preparator::Stats: return false;
    default: return true;
  }
}

Table run_pipeline(const PipelineSpec& spec,
                   const std::function<Table(const PreparatorCall&)>& join_resolver) {
  Table state;
  for (const auto& step : spec.steps) {
    PreparatorCall call = step;
    if (call.op == Preparator::Read) {
      if (!call.args.contains("path")) call.args["path"] = spec.dataset.path;
      if (!call.args.contains("format")) call.args["format"] = spec.dataset.format;
    }
    if (call.op == Preparator::Join) {
      if (!join_resolver) throw InvalidArgument("pipeline join requires a join resolver");
      Table right = join_resolver(call);
      state = ref_join(state, right, call);
      continue;
    }
    ApplyResult r = ref_apply(state, call);
    if (threads_state(call.op)) state = std::move(std::get<Table>(r));
  }
  return state;
}

}  // namespace prepbench::refeng
