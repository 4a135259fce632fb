#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prepbench/table.hpp"

namespace prepbench {

/// Dataset feature summary: row/column counts, per-kind column counts,
/// null percentage over all cells, string length range, file size.
struct DatasetProfile {
  std::int64_t rows = 0;
  std::int64_t columns = 0;
  std::int64_t numeric_cols = 0;
  std::int64_t string_cols = 0;
  std::int64_t boolean_cols = 0;
  double null_pct = 0.0;  // null cells / all cells * 100
  std::optional<std::pair<std::int64_t, std::int64_t>> str_len_range;
  std::int64_t file_size_bytes = 0;
  std::int64_t datetime_cols = 0;  // counted separately from the three kinds

  bool operator==(const DatasetProfile&) const = default;
};

nlohmann::json profile_to_json(const DatasetProfile& p);

/// Single streaming pass over the file. CSV nulls: empty fields plus the
/// documented tokens (NA, NaN, null; case-insensitive). str_len_range is
/// computed on raw cell text of string columns only.
DatasetProfile profile(const std::filesystem::path& path, const std::string& format);

struct SampleSpec {
  double fraction = 100.0;         // (0, 100]
  std::uint64_t seed = 42;
  std::string method = "random-uniform";  // random-uniform | head
};

/// Writes a row sample of `path` to `out_path` (same format) and profiles the
/// result. Output row count = round(fraction/100 * source rows); the sample
/// is without replacement, keeps source row order, and is deterministic for
/// a fixed seed.
DatasetProfile sample(const std::filesystem::path& path, const std::string& format,
                      const SampleSpec& spec, const std::filesystem::path& out_path);

struct FixtureColumn {
  std::string name;
  DataType type = DataType::Float;
};

/// Synthetic dataset with controlled dtype mix, null density, duplicate
/// density and string lengths; reproducible by seed.
struct FixtureSpec {
  std::int64_t rows = 1000;
  std::vector<FixtureColumn> columns;
  double null_density = 0.0;       // exact fraction of null cells
  double duplicate_density = 0.0;  // fraction of rows copied from earlier rows
  std::int64_t str_len_min = 1;
  std::int64_t str_len_max = 16;
  std::uint64_t seed = 42;
  std::string format = "csv";  // csv | parquet
};

/// Parses "name:type,name:type,..." (types: int,float,bool,string,datetime).
std::vector<FixtureColumn> parse_fixture_schema(const std::string& spec);

/// Generates the fixture in memory.
Table make_fixture_table(const FixtureSpec& spec);

/// Generates and writes the fixture; returns the path.
std::filesystem::path make_fixture(const FixtureSpec& spec, const std::filesystem::path& path);

}  // namespace prepbench
