#pragma once

#include <filesystem>

#include "prepbench/table.hpp"

namespace prepbench {

/// Self-contained Parquet subset, enough for the harness's interchange needs:
/// flat schemas over the five canonical types, PLAIN encoding, uncompressed
/// data pages (V1), RLE/bit-packed definition levels, Thrift compact footer.
/// Files written here read back bit-faithfully and load in stock Parquet
/// readers; reading rejects compressed or nested inputs with FormatError.
///
/// Type mapping: int -> INT64, float -> DOUBLE, bool -> BOOLEAN,
/// string -> BYTE_ARRAY (UTF8), datetime -> INT64 (TIMESTAMP_MILLIS).
/// INT32 and DATE columns widen to int/datetime on read.
Table read_parquet(const std::filesystem::path& path);

void write_parquet(const Table& table, const std::filesystem::path& path,
                   std::size_t rows_per_group = 1u << 20);

/// Row count from the footer alone (no data pages touched).
std::int64_t parquet_row_count(const std::filesystem::path& path);

}  // namespace prepbench
