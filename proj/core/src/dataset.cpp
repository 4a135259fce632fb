#include "prepbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_set>

#include "prepbench/csv.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/parquet.hpp"

namespace prepbench {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : static_cast<std::uint64_t>(
                          (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

bool looks_int(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

bool looks_float(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool looks_bool(const std::string& s) {
  return s == "true" || s == "false" || s == "True" || s == "False" || s == "TRUE" ||
         s == "FALSE";
}

bool looks_datetime(const std::string& s) {
  return parse_datetime(s, "%Y-%m-%d %H:%M:%S").has_value() || parse_iso_date(s).has_value();
}

struct ColumnScan {
  bool any = false;
  bool all_int = true, all_float = true, all_bool = true, all_datetime = true;
  std::int64_t nulls = 0;
  std::int64_t len_min = 0, len_max = 0;
  bool len_seen = false;

  DataType resolve() const {
    if (!any) return DataType::String;
    if (all_bool) return DataType::Bool;
    if (all_int) return DataType::Int;
    if (all_float) return DataType::Float;
    if (all_datetime) return DataType::Datetime;
    return DataType::String;
  }
};

DatasetProfile profile_scans(const std::vector<ColumnScan>& scans, std::int64_t rows) {
  DatasetProfile p;
  p.rows = rows;
  p.columns = static_cast<std::int64_t>(scans.size());
  std::int64_t nulls = 0;
  std::int64_t smin = 0, smax = 0;
  bool sseen = false;
  for (const auto& s : scans) {
    nulls += s.nulls;
    switch (s.resolve()) {
      case DataType::Int:
      case DataType::Float: ++p.numeric_cols; break;
      case DataType::Bool: ++p.boolean_cols; break;
      case DataType::Datetime: ++p.datetime_cols; break;
      case DataType::String:
        ++p.string_cols;
        if (s.len_seen) {
          if (!sseen) {
            smin = s.len_min;
            smax = s.len_max;
            sseen = true;
          } else {
            smin = std::min(smin, s.len_min);
            smax = std::max(smax, s.len_max);
          }
        }
        break;
    }
  }
  const std::int64_t cells = p.rows * p.columns;
  p.null_pct = cells == 0 ? 0.0 : 100.0 * static_cast<double>(nulls) / static_cast<double>(cells);
  if (sseen) p.str_len_range = {smin, smax};
  return p;
}

DatasetProfile profile_table(const Table& t) {
  std::vector<ColumnScan> scans(t.column_count());
  for (std::size_t c = 0; c < t.column_count(); ++c) {
    auto& s = scans[c];
    const DataType type = t.schema()[c].type;
    s.any = true;
    s.all_int = type == DataType::Int;
    s.all_float = type == DataType::Int || type == DataType::Float;
    s.all_bool = type == DataType::Bool;
    s.all_datetime = type == DataType::Datetime;
    for (const auto& row : t.rows()) {
      if (is_null(row[c])) {
        ++s.nulls;
        continue;
      }
      if (type == DataType::String) {
        const auto len = static_cast<std::int64_t>(std::get<std::string>(row[c]).size());
        if (!s.len_seen) {
          s.len_min = s.len_max = len;
          s.len_seen = true;
        } else {
          s.len_min = std::min(s.len_min, len);
          s.len_max = std::max(s.len_max, len);
        }
      }
    }
  }
  return profile_scans(scans, static_cast<std::int64_t>(t.row_count()));
}

}  // namespace

nlohmann::json profile_to_json(const DatasetProfile& p) {
  nlohmann::json j{
      {"rows", p.rows},
      {"columns", p.columns},
      {"numeric_cols", p.numeric_cols},
      {"string_cols", p.string_cols},
      {"boolean_cols", p.boolean_cols},
      {"null_pct", p.null_pct},
      {"file_size_bytes", p.file_size_bytes},
  };
  if (p.str_len_range)
    j["str_len_range"] = {p.str_len_range->first, p.str_len_range->second};
  else
    j["str_len_range"] = nullptr;
  if (p.datetime_cols > 0) j["datetime_cols"] = p.datetime_cols;
  return j;
}

DatasetProfile profile(const std::filesystem::path& path, const std::string& format) {
  if (!std::filesystem::exists(path)) throw IOError("no such file: " + path.string());
  DatasetProfile p;
  if (format == "parquet") {
    p = profile_table(read_parquet(path));
  } else if (format == "csv") {
    const CsvOptions opts;
    std::vector<ColumnScan> scans;
    std::vector<std::string> header;
    const std::size_t rows = scan_csv(
        path, opts,
        [&](const std::vector<std::string>& rec) {
          if (scans.empty()) scans.resize(rec.size());
          for (std::size_t c = 0; c < rec.size() && c < scans.size(); ++c) {
            auto& s = scans[c];
            const std::string& text = rec[c];
            if (csv_field_is_null(text, opts)) {
              ++s.nulls;
              continue;
            }
            s.any = true;
            if (s.all_int && !looks_int(text)) s.all_int = false;
            if (s.all_float && !looks_float(text)) s.all_float = false;
            if (s.all_bool && !looks_bool(text)) s.all_bool = false;
            if (s.all_datetime && !looks_datetime(text)) s.all_datetime = false;
            const auto len = static_cast<std::int64_t>(text.size());
            if (!s.len_seen) {
              s.len_min = s.len_max = len;
              s.len_seen = true;
            } else {
              s.len_min = std::min(s.len_min, len);
              s.len_max = std::max(s.len_max, len);
            }
          }
        },
        &header);
    if (scans.empty()) scans.resize(header.size());
    p = profile_scans(scans, static_cast<std::int64_t>(rows));
  } else {
    throw FormatError("unknown dataset format '" + format + "'");
  }
  p.file_size_bytes = static_cast<std::int64_t>(std::filesystem::file_size(path));
  return p;
}

namespace {

/// k distinct sorted indices out of n, uniform without replacement
/// (reservoir), deterministic for a fixed seed.
std::vector<std::uint64_t> pick_rows(std::uint64_t n, std::uint64_t k, std::uint64_t seed) {
  std::vector<std::uint64_t> chosen;
  chosen.reserve(k);
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i < k) {
      chosen.push_back(i);
    } else {
      const std::uint64_t j = bounded(rng, i + 1);
      if (j < k) chosen[j] = i;
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

DatasetProfile sample(const std::filesystem::path& path, const std::string& format,
                      const SampleSpec& spec, const std::filesystem::path& out_path) {
  if (!(spec.fraction > 0.0 && spec.fraction <= 100.0))
    throw InvalidArgument("sample fraction must be in (0, 100]");
  if (spec.method != "random-uniform" && spec.method != "head")
    throw InvalidArgument("sample method must be 'random-uniform' or 'head'");

  if (format == "parquet") {
    Table t = read_parquet(path);
    const auto n = static_cast<std::uint64_t>(t.row_count());
    const auto k = static_cast<std::uint64_t>(std::llround(spec.fraction / 100.0 * static_cast<double>(n)));
    Table out(t.schema());
    if (spec.method == "head") {
      for (std::uint64_t i = 0; i < k; ++i) out.rows().push_back(t.row(i));
    } else {
      for (const std::uint64_t i : pick_rows(n, k, spec.seed)) out.rows().push_back(t.row(i));
    }
    write_parquet(out, out_path);
    auto p = profile_table(out);
    p.file_size_bytes = static_cast<std::int64_t>(std::filesystem::file_size(out_path));
    return p;
  }
  if (format != "csv") throw FormatError("unknown dataset format '" + format + "'");

  const CsvOptions opts;
  std::vector<std::string> header;
  const std::size_t n = scan_csv(path, opts, [](const auto&) {}, &header);
  const auto k = static_cast<std::uint64_t>(std::llround(spec.fraction / 100.0 * static_cast<double>(n)));

  std::vector<std::uint64_t> rows;
  if (spec.method == "random-uniform") rows = pick_rows(n, k, spec.seed);

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + out_path.string());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << opts.delimiter;
    out << csv_escape_field(header[c], opts.delimiter);
  }
  out << '\n';

  std::size_t index = 0, cursor = 0;
  scan_csv(path, opts, [&](const std::vector<std::string>& rec) {
    bool take = false;
    if (spec.method == "head") {
      take = index < k;
    } else {
      while (cursor < rows.size() && rows[cursor] < index) ++cursor;
      take = cursor < rows.size() && rows[cursor] == index;
    }
    if (take) {
      for (std::size_t c = 0; c < rec.size(); ++c) {
        if (c) out << opts.delimiter;
        out << csv_escape_field(rec[c], opts.delimiter);
      }
      out << '\n';
    }
    ++index;
  });
  out.close();
  return profile(out_path, "csv");
}

std::vector<FixtureColumn> parse_fixture_schema(const std::string& spec) {
  std::vector<FixtureColumn> cols;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const std::size_t comma = spec.find(',', pos);
    const std::string part = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    const std::size_t colon = part.find(':');
    if (colon == std::string::npos)
      throw InvalidArgument("fixture schema entries look like name:type, got '" + part + "'");
    const auto type = data_type_from_string(part.substr(colon + 1));
    if (!type) throw InvalidArgument("unknown fixture column type in '" + part + "'");
    cols.push_back({part.substr(0, colon), *type});
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return cols;
}

Table make_fixture_table(const FixtureSpec& spec) {
  if (spec.rows < 1) throw InvalidArgument("fixture needs at least one row");
  if (spec.columns.empty()) throw InvalidArgument("fixture needs at least one column");
  if (spec.str_len_min < 0 || spec.str_len_min > spec.str_len_max)
    throw InvalidArgument("fixture string length range is inverted");

  std::mt19937_64 rng(spec.seed);
  static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789 ";
  const auto rand_string = [&](std::int64_t len) {
    std::string s;
    s.reserve(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i)
      s += alphabet[bounded(rng, sizeof(alphabet) - 1)];
    return s;
  };
  const std::int64_t epoch_lo = days_from_civil(2010, 1, 1) * 86400000;
  const std::int64_t epoch_hi = days_from_civil(2020, 1, 1) * 86400000;

  Table t;
  for (const auto& c : spec.columns) t.schema().push_back({c.name, c.type});

  const std::int64_t n_dup =
      std::llround(spec.duplicate_density * static_cast<double>(spec.rows));
  const std::int64_t n_unique = std::max<std::int64_t>(1, spec.rows - n_dup);

  std::unordered_set<std::string> seen;
  for (std::int64_t r = 0; r < n_unique; ++r) {
    std::vector<Value> row;
    std::string key;
    for (int attempt = 0; attempt < 16; ++attempt) {
      row.clear();
      key.clear();
      for (const auto& c : spec.columns) {
        Value v;
        switch (c.type) {
          case DataType::Int:
            v = static_cast<std::int64_t>(bounded(rng, static_cast<std::uint64_t>(spec.rows) * 10 + 10));
            break;
          case DataType::Float:
            v = static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) * 1000.0;
            break;
          case DataType::Bool: v = (rng() & 1) != 0; break;
          case DataType::String:
            v = rand_string(spec.str_len_min +
                            static_cast<std::int64_t>(bounded(
                                rng, static_cast<std::uint64_t>(spec.str_len_max - spec.str_len_min + 1))));
            break;
          case DataType::Datetime:
            v = Datetime{epoch_lo + static_cast<std::int64_t>(
                                        bounded(rng, static_cast<std::uint64_t>(epoch_hi - epoch_lo)))};
            break;
        }
        key += render_value(v);
        key += '\x02';
        row.push_back(std::move(v));
      }
      if (seen.insert(key).second) break;
    }
    t.rows().push_back(std::move(row));
  }

  // Plant the exact min- and max-length strings before duplicating so copies
  // remain exact duplicates and the realized range matches the request.
  std::optional<std::size_t> str_col;
  for (std::size_t c = 0; c < spec.columns.size(); ++c)
    if (spec.columns[c].type == DataType::String) {
      str_col = c;
      break;
    }
  std::vector<std::pair<std::size_t, std::size_t>> protected_cells;
  if (str_col) {
    t.at(0, *str_col) = rand_string(spec.str_len_min);
    protected_cells.push_back({0, *str_col});
    if (n_unique > 1) {
      t.at(1, *str_col) = rand_string(spec.str_len_max);
      protected_cells.push_back({1, *str_col});
    } else if (spec.str_len_min != spec.str_len_max) {
      t.at(0, *str_col) = rand_string(spec.str_len_max);
    }
  }

  for (std::int64_t r = n_unique; r < spec.rows; ++r)
    t.rows().push_back(t.row(bounded(rng, static_cast<std::uint64_t>(n_unique))));

  // Exactly round(null_density * cells) nulls at distinct random positions.
  const std::uint64_t cells = static_cast<std::uint64_t>(spec.rows) * spec.columns.size();
  const auto nulls = static_cast<std::uint64_t>(
      std::llround(spec.null_density * static_cast<double>(cells)));
  if (nulls > 0) {
    const auto is_protected = [&](std::uint64_t pos) {
      const std::size_t r = pos / spec.columns.size();
      const std::size_t c = pos % spec.columns.size();
      for (const auto& [pr, pc] : protected_cells)
        if (pr == r && pc == c) return true;
      return false;
    };
    std::unordered_set<std::uint64_t> positions;
    // Floyd's sampling: exactly `nulls` distinct cells.
    for (std::uint64_t i = cells - nulls; i < cells; ++i) {
      std::uint64_t p = bounded(rng, i + 1);
      if (positions.count(p)) p = i;
      while (is_protected(p) || positions.count(p)) p = (p + 1) % cells;
      positions.insert(p);
    }
    for (const std::uint64_t pos : positions)
      t.at(pos / spec.columns.size(), pos % spec.columns.size()) = Value{};
  }
  return t;
}

std::filesystem::path make_fixture(const FixtureSpec& spec, const std::filesystem::path& path) {
  const Table t = make_fixture_table(spec);
  if (spec.format == "parquet") write_parquet(t, path);
  else write_csv(t, path);
  return path;
}

}  // namespace prepbench
