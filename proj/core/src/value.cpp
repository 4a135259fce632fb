#include "prepbench/value.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "prepbench/errors.hpp"

namespace prepbench {

const char* to_string(DataType t) {
  switch (t) {
    case DataType::Int: return "int";
    case DataType::Float: return "float";
    case DataType::Bool: return "bool";
    case DataType::String: return "string";
    case DataType::Datetime: return "datetime";
  }
  return "?";
}

std::optional<DataType> data_type_from_string(const std::string& s) {
  if (s == "int") return DataType::Int;
  if (s == "float") return DataType::Float;
  if (s == "bool") return DataType::Bool;
  if (s == "string") return DataType::String;
  if (s == "datetime") return DataType::Datetime;
  return std::nullopt;
}

DataType type_of(const Value& v) {
  switch (v.index()) {
    case 1: return DataType::Int;
    case 2: return DataType::Float;
    case 3: return DataType::Bool;
    case 4: return DataType::String;
    case 5: return DataType::Datetime;
    default: throw TypeMismatch("type_of called on null");
  }
}

bool conforms_to(const Value& v, DataType t) {
  return is_null(v) || type_of(v) == t;
}

double as_double(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
  throw TypeMismatch("expected a numeric value");
}

namespace {

template <typename T>
int cmp3(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

}  // namespace

int compare_values(const Value& a, const Value& b) {
  const bool an = is_null(a), bn = is_null(b);
  if (an || bn) return an && bn ? 0 : (an ? 1 : -1);  // nulls last
  // Int and Float compare numerically so mixed numeric columns stay ordered.
  const bool a_num = a.index() == 1 || a.index() == 2;
  const bool b_num = b.index() == 1 || b.index() == 2;
  if (a_num && b_num && a.index() != b.index()) return cmp3(as_double(a), as_double(b));
  if (a.index() != b.index()) return cmp3(a.index(), b.index());
  switch (a.index()) {
    case 1: return cmp3(std::get<std::int64_t>(a), std::get<std::int64_t>(b));
    case 2: return cmp3(std::get<double>(a), std::get<double>(b));
    case 3: return cmp3(std::get<bool>(a), std::get<bool>(b));
    case 4: return cmp3(std::get<std::string>(a), std::get<std::string>(b));
    case 5: return cmp3(std::get<Datetime>(a).millis, std::get<Datetime>(b).millis);
    default: return 0;
  }
}

bool values_equal(const Value& a, const Value& b) { return compare_values(a, b) == 0; }

std::string render_value(const Value& v) {
  switch (v.index()) {
    case 0: return "";
    case 1: {
      std::array<char, 24> buf{};
      auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::get<std::int64_t>(v));
      return std::string(buf.data(), p);
    }
    case 2: {
      const double d = std::get<double>(v);
      std::array<char, 40> buf{};
      auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
      std::string s(buf.data(), p);
      if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
      return s;
    }
    case 3: return std::get<bool>(v) ? "true" : "false";
    case 4: return std::get<std::string>(v);
    case 5: return iso_datetime(std::get<Datetime>(v));
  }
  return "";
}

std::string value_key(const Value& v) {
  if (is_null(v)) return "\x01";
  std::string key(1, static_cast<char>('0' + static_cast<int>(type_of(v))));
  if (const auto* dt = std::get_if<Datetime>(&v)) {
    key += std::to_string(dt->millis);
  } else {
    key += render_value(v);
  }
  return key;
}

// Howard Hinnant's civil-date algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yy + (m <= 2));
}

namespace {

bool read_int(const std::string& s, size_t& pos, int digits, int& out) {
  if (pos + digits > s.size()) return false;
  int v = 0;
  for (int i = 0; i < digits; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += digits;
  out = v;
  return true;
}

}  // namespace

std::optional<Datetime> parse_datetime(const std::string& text, const std::string& format) {
  size_t tp = 0;
  int year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  for (size_t fp = 0; fp < format.size(); ++fp) {
    if (format[fp] == '%' && fp + 1 < format.size()) {
      const char dir = format[++fp];
      int v = 0;
      switch (dir) {
        case 'Y':
          if (!read_int(text, tp, 4, v)) return std::nullopt;
          year = v;
          break;
        case 'y':
          if (!read_int(text, tp, 2, v)) return std::nullopt;
          year = v >= 70 ? 1900 + v : 2000 + v;
          break;
        case 'm':
          if (!read_int(text, tp, 2, v) || v < 1 || v > 12) return std::nullopt;
          month = v;
          break;
        case 'd':
          if (!read_int(text, tp, 2, v) || v < 1 || v > 31) return std::nullopt;
          day = v;
          break;
        case 'H':
          if (!read_int(text, tp, 2, v) || v > 23) return std::nullopt;
          hour = v;
          break;
        case 'M':
          if (!read_int(text, tp, 2, v) || v > 59) return std::nullopt;
          minute = v;
          break;
        case 'S':
          if (!read_int(text, tp, 2, v) || v > 60) return std::nullopt;
          second = v;
          break;
        case '%':
          if (tp >= text.size() || text[tp] != '%') return std::nullopt;
          ++tp;
          break;
        default: return std::nullopt;  // unsupported directive
      }
    } else {
      if (tp >= text.size() || text[tp] != format[fp]) return std::nullopt;
      ++tp;
    }
  }
  if (tp != text.size()) return std::nullopt;
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return Datetime{((days * 24 + hour) * 60 + minute) * 60000 + second * 1000};
}

std::string format_datetime(const Datetime& dt, const std::string& format) {
  std::int64_t secs = dt.millis / 1000;
  std::int64_t days = secs / 86400;
  std::int64_t rem = secs % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  const int hour = static_cast<int>(rem / 3600);
  const int minute = static_cast<int>((rem % 3600) / 60);
  const int second = static_cast<int>(rem % 60);

  std::string out;
  char buf[8];
  for (size_t fp = 0; fp < format.size(); ++fp) {
    if (format[fp] == '%' && fp + 1 < format.size()) {
      switch (format[++fp]) {
        case 'Y': std::snprintf(buf, sizeof buf, "%04d", y); out += buf; break;
        case 'y': std::snprintf(buf, sizeof buf, "%02d", y % 100); out += buf; break;
        case 'm': std::snprintf(buf, sizeof buf, "%02u", m); out += buf; break;
        case 'd': std::snprintf(buf, sizeof buf, "%02u", d); out += buf; break;
        case 'H': std::snprintf(buf, sizeof buf, "%02d", hour); out += buf; break;
        case 'M': std::snprintf(buf, sizeof buf, "%02d", minute); out += buf; break;
        case 'S': std::snprintf(buf, sizeof buf, "%02d", second); out += buf; break;
        case '%': out += '%'; break;
        default: out += '%'; out += format[fp]; break;
      }
    } else {
      out += format[fp];
    }
  }
  return out;
}

std::string iso_datetime(const Datetime& dt) {
  if (dt.millis % 86400000 == 0) return format_datetime(dt, "%Y-%m-%d");
  return format_datetime(dt, "%Y-%m-%d %H:%M:%S");
}

std::optional<Datetime> parse_iso_date(const std::string& text) {
  return parse_datetime(text, "%Y-%m-%d");
}

Datetime make_date(int y, unsigned m, unsigned d) {
  return Datetime{days_from_civil(y, m, d) * 86400000};
}

Datetime add_days(const Datetime& dt, std::int64_t days) {
  return Datetime{dt.millis + days * 86400000};
}

}  // namespace prepbench
