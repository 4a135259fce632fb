#include "prepbench/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>

#include "prepbench/errors.hpp"

namespace prepbench {

namespace {

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  auto [p, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && p == end;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  auto [p, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && p == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (iequals(s, "true")) return out = true, true;
  if (iequals(s, "false")) return out = false, true;
  return false;
}

}  // namespace

bool csv_field_is_null(const std::string& text, const CsvOptions& opts) {
  if (text.empty()) return true;
  for (const auto& tok : opts.null_tokens)
    if (iequals(text, tok)) return true;
  return false;
}

std::size_t scan_csv(const std::filesystem::path& path, const CsvOptions& opts,
                     const std::function<void(const std::vector<std::string>&)>& on_record,
                     std::vector<std::string>* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());

  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool record_started = false;
  bool seen_header = !opts.has_header;
  std::size_t records = 0;

  auto finish_record = [&] {
    fields.push_back(std::move(field));
    field.clear();
    if (opts.ignore_trailing_delimiter && fields.size() > 1 && fields.back().empty())
      fields.pop_back();
    if (!seen_header) {
      seen_header = true;
      if (header) *header = fields;
    } else {
      ++records;
      on_record(fields);
    }
    fields.clear();
    record_started = false;
  };

  char buf[1 << 16];
  char prev = 0;
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      const char c = buf[i];
      if (in_quotes) {
        if (c == '"') {
          in_quotes = false;  // may re-enter on the doubled-quote case below
        } else {
          field += c;
        }
        prev = c;
        continue;
      }
      if (c == '"') {
        if (prev == '"') {
          // Second half of an escaped "" inside a quoted field.
          field += '"';
        }
        in_quotes = true;
        record_started = true;
      } else if (c == opts.delimiter) {
        fields.push_back(std::move(field));
        field.clear();
        record_started = true;
      } else if (c == '\n') {
        if (prev == '\r' && !field.empty() && field.back() == '\r') field.pop_back();
        if (record_started || !field.empty() || !fields.empty()) finish_record();
      } else {
        field += c;
        record_started = true;
      }
      prev = c;
    }
    if (n == 0) break;
  }
  if (in_quotes) throw ParseError("unterminated quoted field in " + path.string());
  if (record_started || !field.empty() || !fields.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    finish_record();
  }
  return records;
}

Value parse_csv_field(const std::string& text, DataType type, const CsvOptions& opts) {
  if (csv_field_is_null(text, opts)) return Value{};
  switch (type) {
    case DataType::Int: {
      std::int64_t v;
      if (!parse_int64(text, v)) throw FormatError("not an int: '" + text + "'");
      return v;
    }
    case DataType::Float: {
      double v;
      if (!parse_double(text, v)) throw FormatError("not a float: '" + text + "'");
      return v;
    }
    case DataType::Bool: {
      bool v;
      if (!parse_bool(text, v)) throw FormatError("not a bool: '" + text + "'");
      return v;
    }
    case DataType::Datetime: {
      if (auto dt = parse_datetime(text, "%Y-%m-%d %H:%M:%S")) return *dt;
      if (auto dt = parse_iso_date(text)) return *dt;
      throw FormatError("not a datetime: '" + text + "'");
    }
    case DataType::String: return text;
  }
  return Value{};
}

namespace {

// Narrowest type that covers all non-null samples, in inference order.
DataType infer_column_type(const std::vector<std::string>& samples, const CsvOptions& opts) {
  bool any = false, all_int = true, all_float = true, all_bool = true, all_datetime = true;
  std::int64_t i64;
  double f64;
  bool b;
  for (const auto& s : samples) {
    if (csv_field_is_null(s, opts)) continue;
    any = true;
    if (all_int && !parse_int64(s, i64)) all_int = false;
    if (all_float && !parse_double(s, f64)) all_float = false;
    if (all_bool && !parse_bool(s, b)) all_bool = false;
    if (all_datetime && !parse_datetime(s, "%Y-%m-%d %H:%M:%S") && !parse_iso_date(s))
      all_datetime = false;
    if (!all_int && !all_float && !all_bool && !all_datetime) break;
  }
  if (!any) return DataType::String;
  if (all_bool) return DataType::Bool;
  if (all_int) return DataType::Int;
  if (all_float) return DataType::Float;
  if (all_datetime) return DataType::Datetime;
  return DataType::String;
}

}  // namespace

Table read_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> raw;
  scan_csv(path, opts, [&](const std::vector<std::string>& rec) { raw.push_back(rec); }, &header);

  std::vector<ColumnSpec> schema = opts.schema;
  if (schema.empty()) {
    if (!opts.has_header) throw InvalidArgument("headerless CSV requires an explicit schema");
    const std::size_t ncols = header.size();
    std::vector<std::vector<std::string>> cols(ncols);
    for (const auto& rec : raw) {
      for (std::size_t c = 0; c < ncols; ++c)
        cols[c].push_back(c < rec.size() ? rec[c] : std::string());
    }
    schema.reserve(ncols);
    for (std::size_t c = 0; c < ncols; ++c)
      schema.push_back({header[c], infer_column_type(cols[c], opts)});
  }

  Table table(schema);
  for (const auto& rec : raw) {
    if (rec.size() != schema.size())
      throw ParseError("record with " + std::to_string(rec.size()) + " fields, expected " +
                       std::to_string(schema.size()) + " in " + path.string());
    std::vector<Value> row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c)
      row.push_back(parse_csv_field(rec[c], schema[c].type, opts));
    table.rows().push_back(std::move(row));
  }
  return table;
}

std::string csv_escape_field(const std::string& field, char delimiter) {
  const bool need_quotes = field.find_first_of(std::string{delimiter} + "\"\r\n") != std::string::npos;
  if (!need_quotes) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const Table& table, const std::filesystem::path& path, const CsvOptions& opts) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  const auto& schema = table.schema();
  if (opts.has_header) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out << opts.delimiter;
      out << csv_escape_field(schema[c].name, opts.delimiter);
    }
    out << '\n';
  }
  for (const auto& row : table.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << opts.delimiter;
      if (!is_null(row[c])) out << csv_escape_field(render_value(row[c]), opts.delimiter);
    }
    out << '\n';
  }
  if (!out) throw IOError("write failed: " + path.string());
}

}  // namespace prepbench
