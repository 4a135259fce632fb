#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "prepbench/table.hpp"

namespace prepbench {

struct CsvOptions {
  char delimiter = ',';
  bool has_header = true;
  /// Tokens treated as null besides the empty field (case-insensitive).
  std::vector<std::string> null_tokens = {"NA", "NaN", "null"};
  /// Schema to apply instead of inference (required when has_header is false).
  std::vector<ColumnSpec> schema;
  /// Drop a trailing empty field on every record (TPC-H .tbl trailing pipe).
  bool ignore_trailing_delimiter = false;
};

/// Streaming RFC-4180 reader: quoted fields, escaped quotes, LF and CRLF.
/// Invokes `on_record` for every data record with the raw field texts
/// (null-normalized fields come through `profile`/`read_csv`). Returns the
/// number of data records.
std::size_t scan_csv(const std::filesystem::path& path, const CsvOptions& opts,
                     const std::function<void(const std::vector<std::string>&)>& on_record,
                     std::vector<std::string>* header = nullptr);

/// Reads a whole file into a Table. Column types are inferred from the data
/// (int -> float -> bool -> string) unless opts.schema is given.
Table read_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Writes a Table with canonical quoting: fields containing the delimiter, a
/// quote, or a newline are quoted; nulls become empty fields.
void write_csv(const Table& table, const std::filesystem::path& path, const CsvOptions& opts = {});

std::string csv_escape_field(const std::string& field, char delimiter);

/// Field -> typed value for a declared column type; null tokens and empty
/// fields map to null. Throws FormatError when the text does not parse.
Value parse_csv_field(const std::string& text, DataType type, const CsvOptions& opts);

bool csv_field_is_null(const std::string& text, const CsvOptions& opts);

}  // namespace prepbench
