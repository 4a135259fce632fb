#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace prepbench {

/// Canonical cell types shared by every engine and the interchange format.
enum class DataType { Int, Float, Bool, String, Datetime };

const char* to_string(DataType t);
std::optional<DataType> data_type_from_string(const std::string& s);

/// Timestamp as milliseconds since the Unix epoch, UTC.
struct Datetime {
  std::int64_t millis = 0;
  auto operator<=>(const Datetime&) const = default;
};

/// One cell. monostate is the canonical null marker.
using Value = std::variant<std::monostate, std::int64_t, double, bool, std::string, Datetime>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Type of a non-null value.
DataType type_of(const Value& v);

/// True when `v` is null or holds exactly the alternative for `t`.
bool conforms_to(const Value& v, DataType t);

/// Numeric view of an int/float/bool cell; throws TypeMismatch otherwise.
double as_double(const Value& v);

/// Total order used for sorting and canonical comparison. Nulls sort last.
/// Values of distinct non-null types order by type index (never expected in a
/// well-typed column; kept total so sorting mixed data is still deterministic).
int compare_values(const Value& a, const Value& b);

bool values_equal(const Value& a, const Value& b);

/// Shortest round-trip text form. Floats always carry a decimal marker so the
/// rendered form re-infers as float; datetimes render as ISO-8601.
std::string render_value(const Value& v);

/// Injective key encoding for hashing rows (grouping, joins, duplicate
/// detection): type tag + exact text form. Engines must share this so value
/// identity means the same thing everywhere.
std::string value_key(const Value& v);

// -- datetime helpers ------------------------------------------------------

/// Days from 1970-01-01 for the given civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

/// Parse with an explicit strftime-like format. Supported directives:
/// %Y %m %d %H %M %S %y plus literal characters. Returns nullopt on mismatch.
std::optional<Datetime> parse_datetime(const std::string& text, const std::string& format);

/// Format with the same directive subset.
std::string format_datetime(const Datetime& dt, const std::string& format);

/// ISO rendering: "%Y-%m-%d" when the timestamp is midnight, else
/// "%Y-%m-%d %H:%M:%S".
std::string iso_datetime(const Datetime& dt);

/// Convenience: parse "YYYY-MM-DD" into a midnight timestamp.
std::optional<Datetime> parse_iso_date(const std::string& text);

Datetime make_date(int y, unsigned m, unsigned d);
Datetime add_days(const Datetime& dt, std::int64_t days);

}  // namespace prepbench
