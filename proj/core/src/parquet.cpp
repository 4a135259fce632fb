#include "prepbench/parquet.hpp"

#include <cstring>
#include <fstream>

#include "prepbench/errors.hpp"

namespace prepbench {

namespace {

// Parquet thrift enums (the subset in play).
enum PhysicalType { BOOLEAN = 0, INT32 = 1, INT64 = 2, FLOAT = 4, DOUBLE = 5, BYTE_ARRAY = 6 };
enum ConvertedType { UTF8 = 0, DATE = 6, TIMESTAMP_MILLIS = 9 };
enum Repetition { REQUIRED = 0, OPTIONAL = 1 };
enum Encoding { PLAIN = 0, RLE = 3 };
enum PageType { DATA_PAGE = 0 };

// Thrift compact-protocol wire types.
enum CType {
  CT_STOP = 0,
  CT_TRUE = 1,
  CT_FALSE = 2,
  CT_BYTE = 3,
  CT_I16 = 4,
  CT_I32 = 5,
  CT_I64 = 6,
  CT_DOUBLE = 7,
  CT_BINARY = 8,
  CT_LIST = 9,
  CT_SET = 10,
  CT_MAP = 11,
  CT_STRUCT = 12,
};

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class CompactWriter {
public:
  std::string buf;

  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      buf.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    buf.push_back(static_cast<char>(v));
  }

  void zigzag(std::int64_t v) { varint((static_cast<std::uint64_t>(v) << 1) ^ (v >> 63)); }

  void field_header(int id, int type) {
    const int delta = id - last_id_;
    if (delta > 0 && delta <= 15) {
      buf.push_back(static_cast<char>((delta << 4) | type));
    } else {
      buf.push_back(static_cast<char>(type));
      zigzag(id);
    }
    last_id_ = id;
  }

  void i32_field(int id, std::int64_t v) {
    field_header(id, CT_I32);
    zigzag(v);
  }
  void i64_field(int id, std::int64_t v) {
    field_header(id, CT_I64);
    zigzag(v);
  }
  void string_field(int id, const std::string& s) {
    field_header(id, CT_BINARY);
    varint(s.size());
    buf.append(s);
  }
  void list_field(int id, int elem_type, std::size_t n) {
    field_header(id, CT_LIST);
    if (n < 15) {
      buf.push_back(static_cast<char>((n << 4) | elem_type));
    } else {
      buf.push_back(static_cast<char>(0xF0 | elem_type));
      varint(n);
    }
  }
  void struct_field(int id) {
    field_header(id, CT_STRUCT);
    stack_.push_back(last_id_);
    last_id_ = 0;
  }
  void struct_end() {
    buf.push_back(CT_STOP);
    last_id_ = stack_.back();
    stack_.pop_back();
  }
  void stop() { buf.push_back(CT_STOP); }

  /// For structs written as list elements (fresh field-id context).
  void begin_element() {
    stack_.push_back(last_id_);
    last_id_ = 0;
  }
  void end_element() {
    buf.push_back(CT_STOP);
    last_id_ = stack_.back();
    stack_.pop_back();
  }

private:
  int last_id_ = 0;
  std::vector<int> stack_;
};

class CompactReader {
public:
  CompactReader(const std::uint8_t* p, const std::uint8_t* end) : p_(p), end_(end) {}

  std::uint64_t varint() {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
      if (p_ >= end_) throw FormatError("parquet: truncated varint");
      const std::uint8_t b = *p_++;
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
      shift += 7;
      if (shift > 63) throw FormatError("parquet: varint overflow");
    }
  }

  std::int64_t zigzag() {
    const std::uint64_t v = varint();
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
  }

  std::string binary() {
    const std::uint64_t n = varint();
    if (p_ + n > end_) throw FormatError("parquet: truncated binary");
    std::string s(reinterpret_cast<const char*>(p_), n);
    p_ += n;
    return s;
  }

  /// Reads the next field header inside a struct. Returns false at STOP.
  bool next_field(int& id, int& type) {
    if (p_ >= end_) throw FormatError("parquet: truncated struct");
    const std::uint8_t b = *p_++;
    if (b == CT_STOP) return false;
    type = b & 0x0F;
    const int delta = b >> 4;
    id = delta != 0 ? last_id_ + delta : static_cast<int>(zigzag());
    last_id_ = id;
    return true;
  }

  void enter_struct() {
    stack_.push_back(last_id_);
    last_id_ = 0;
  }
  void exit_struct() {
    last_id_ = stack_.back();
    stack_.pop_back();
  }

  std::pair<int, std::uint64_t> list_header() {
    if (p_ >= end_) throw FormatError("parquet: truncated list");
    const std::uint8_t b = *p_++;
    const int elem = b & 0x0F;
    std::uint64_t n = b >> 4;
    if (n == 15) n = varint();
    return {elem, n};
  }

  void skip(int type) {
    switch (type) {
      case CT_TRUE:
      case CT_FALSE: return;
      case CT_BYTE:
        if (p_ >= end_) throw FormatError("parquet: truncated byte");
        ++p_;
        return;
      case CT_I16:
      case CT_I32:
      case CT_I64: varint(); return;
      case CT_DOUBLE:
        if (p_ + 8 > end_) throw FormatError("parquet: truncated double");
        p_ += 8;
        return;
      case CT_BINARY: binary(); return;
      case CT_LIST:
      case CT_SET: {
        const auto [elem, n] = list_header();
        for (std::uint64_t i = 0; i < n; ++i) skip(elem);
        return;
      }
      case CT_MAP: {
        const std::uint64_t n = varint();
        if (n == 0) return;
        if (p_ >= end_) throw FormatError("parquet: truncated map");
        const std::uint8_t kv = *p_++;
        for (std::uint64_t i = 0; i < n; ++i) {
          skip(kv >> 4);
          skip(kv & 0x0F);
        }
        return;
      }
      case CT_STRUCT: {
        enter_struct();
        int id, t;
        while (next_field(id, t)) skip(t);
        exit_struct();
        return;
      }
      default: throw FormatError("parquet: unknown thrift type " + std::to_string(type));
    }
  }

  const std::uint8_t* pos() const { return p_; }

private:
  const std::uint8_t* p_;
  const std::uint8_t* end_;
  int last_id_ = 0;
  std::vector<int> stack_;
};

int physical_type_of(DataType t) {
  switch (t) {
    case DataType::Int:
    case DataType::Datetime: return INT64;
    case DataType::Float: return DOUBLE;
    case DataType::Bool: return BOOLEAN;
    case DataType::String: return BYTE_ARRAY;
  }
  return INT64;
}

// RLE/bit-packed hybrid for 1-bit definition levels, emitted as bit-packed
// groups, with the 4-byte length prefix data page V1 requires.
std::string encode_def_levels(const std::vector<std::uint8_t>& defined) {
  std::string body;
  const std::size_t groups = (defined.size() + 7) / 8;
  // header varint: (groups << 1) | 1 marks a bit-packed run.
  {
    std::uint64_t h = (static_cast<std::uint64_t>(groups) << 1) | 1;
    while (h >= 0x80) {
      body.push_back(static_cast<char>((h & 0x7F) | 0x80));
      h >>= 7;
    }
    body.push_back(static_cast<char>(h));
  }
  for (std::size_t g = 0; g < groups; ++g) {
    std::uint8_t byte = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      const std::size_t i = g * 8 + b;
      if (i < defined.size() && defined[i]) byte |= static_cast<std::uint8_t>(1u << b);
    }
    body.push_back(static_cast<char>(byte));
  }
  std::string out;
  put_u32le(out, static_cast<std::uint32_t>(body.size()));
  out += body;
  return out;
}

std::vector<std::uint8_t> decode_def_levels(const std::uint8_t*& p, const std::uint8_t* end,
                                            std::size_t num_values) {
  if (p + 4 > end) throw FormatError("parquet: truncated def levels");
  std::uint32_t len = 0;
  std::memcpy(&len, p, 4);
  p += 4;
  const std::uint8_t* q = p;
  const std::uint8_t* qend = p + len;
  if (qend > end) throw FormatError("parquet: def levels overrun page");
  p = qend;

  std::vector<std::uint8_t> levels;
  levels.reserve(num_values);
  while (levels.size() < num_values && q < qend) {
    std::uint64_t header = 0;
    int shift = 0;
    while (true) {
      if (q >= qend) throw FormatError("parquet: truncated RLE header");
      const std::uint8_t b = *q++;
      header |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) break;
      shift += 7;
    }
    if (header & 1) {
      const std::uint64_t groups = header >> 1;
      for (std::uint64_t g = 0; g < groups; ++g) {
        if (q >= qend) throw FormatError("parquet: truncated bit-packed group");
        const std::uint8_t byte = *q++;
        for (int b = 0; b < 8 && levels.size() < num_values; ++b)
          levels.push_back((byte >> b) & 1);
      }
    } else {
      const std::uint64_t run = header >> 1;
      if (q >= qend) throw FormatError("parquet: truncated RLE run");
      const std::uint8_t value = *q++;  // bit width 1 -> 1 byte
      for (std::uint64_t i = 0; i < run && levels.size() < num_values; ++i)
        levels.push_back(value & 1);
    }
  }
  if (levels.size() < num_values) throw FormatError("parquet: not enough definition levels");
  return levels;
}

struct ColumnChunkInfo {
  std::string name;
  int physical = INT64;
  int converted = -1;
  int repetition = REQUIRED;
  std::int64_t num_values = 0;
  std::int64_t data_page_offset = 0;
  std::int64_t total_compressed = 0;
  int codec = 0;
};

struct FileInfo {
  std::int64_t num_rows = 0;
  std::vector<ColumnChunkInfo> leaves;  // schema leaves, in order
  struct RowGroupInfo {
    std::int64_t num_rows = 0;
    std::vector<ColumnChunkInfo> columns;
  };
  std::vector<RowGroupInfo> row_groups;
};

ColumnChunkInfo parse_column_meta(CompactReader& r) {
  ColumnChunkInfo c;
  r.enter_struct();
  int id, type;
  while (r.next_field(id, type)) {
    switch (id) {
      case 1: c.physical = static_cast<int>(r.zigzag()); break;
      case 3: {  // path_in_schema
        const auto [elem, n] = r.list_header();
        std::string path;
        for (std::uint64_t i = 0; i < n; ++i) {
          if (!path.empty()) path += '.';
          path += r.binary();
        }
        c.name = path;
        break;
      }
      case 4: c.codec = static_cast<int>(r.zigzag()); break;
      case 5: c.num_values = r.zigzag(); break;
      case 7: c.total_compressed = r.zigzag(); break;
      case 9: c.data_page_offset = r.zigzag(); break;
      default: r.skip(type); break;
    }
  }
  r.exit_struct();
  return c;
}

FileInfo parse_footer(const std::uint8_t* data, std::size_t size) {
  CompactReader r(data, data + size);
  FileInfo info;
  std::vector<ColumnChunkInfo> schema;
  int id, type;
  while (r.next_field(id, type)) {
    switch (id) {
      case 2: {  // schema
        const auto [elem, n] = r.list_header();
        for (std::uint64_t i = 0; i < n; ++i) {
          ColumnChunkInfo leaf;
          bool has_type = false;
          int num_children = 0;
          r.enter_struct();
          int fid, ftype;
          while (r.next_field(fid, ftype)) {
            switch (fid) {
              case 1: leaf.physical = static_cast<int>(r.zigzag()); has_type = true; break;
              case 3: leaf.repetition = static_cast<int>(r.zigzag()); break;
              case 4: leaf.name = r.binary(); break;
              case 5: num_children = static_cast<int>(r.zigzag()); break;
              case 6: leaf.converted = static_cast<int>(r.zigzag()); break;
              default: r.skip(ftype); break;
            }
          }
          r.exit_struct();
          if (i == 0) continue;  // root group
          if (num_children > 0 || !has_type)
            throw FormatError("parquet: nested schemas are not supported");
          if (leaf.repetition == 2)
            throw FormatError("parquet: repeated fields are not supported");
          schema.push_back(std::move(leaf));
        }
        break;
      }
      case 3: info.num_rows = r.zigzag(); break;
      case 4: {  // row groups
        const auto [elem, n] = r.list_header();
        for (std::uint64_t i = 0; i < n; ++i) {
          FileInfo::RowGroupInfo rg;
          r.enter_struct();
          int fid, ftype;
          while (r.next_field(fid, ftype)) {
            if (fid == 1) {
              const auto [celem, cn] = r.list_header();
              for (std::uint64_t c = 0; c < cn; ++c) {
                ColumnChunkInfo chunk;
                r.enter_struct();
                int cid, ctype;
                while (r.next_field(cid, ctype)) {
                  if (cid == 3) chunk = parse_column_meta(r);
                  else r.skip(ctype);
                }
                r.exit_struct();
                rg.columns.push_back(std::move(chunk));
              }
            } else if (fid == 3) {
              rg.num_rows = r.zigzag();
            } else {
              r.skip(ftype);
            }
          }
          r.exit_struct();
          info.row_groups.push_back(std::move(rg));
        }
        break;
      }
      default: r.skip(type); break;
    }
  }
  info.leaves = std::move(schema);
  return info;
}

DataType logical_type(const ColumnChunkInfo& leaf) {
  switch (leaf.physical) {
    case BOOLEAN: return DataType::Bool;
    case INT32: return leaf.converted == DATE ? DataType::Datetime : DataType::Int;
    case INT64: return leaf.converted == TIMESTAMP_MILLIS ? DataType::Datetime : DataType::Int;
    case FLOAT:
    case DOUBLE: return DataType::Float;
    case BYTE_ARRAY: return DataType::String;
    default: throw FormatError("parquet: unsupported physical type " + std::to_string(leaf.physical));
  }
}

struct PageData {
  std::vector<std::uint8_t> defined;
  const std::uint8_t* values = nullptr;
  const std::uint8_t* values_end = nullptr;
  std::size_t num_values = 0;
};

}  // namespace

void write_parquet(const Table& table, const std::filesystem::path& path,
                   std::size_t rows_per_group) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOError("cannot write " + path.string());
  std::int64_t offset = 0;
  const auto emit = [&](const std::string& bytes) {
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    offset += static_cast<std::int64_t>(bytes.size());
  };
  emit("PAR1");

  struct ChunkRecord {
    std::int64_t page_offset = 0;
    std::int64_t size = 0;
    std::int64_t num_values = 0;
  };
  struct GroupRecord {
    std::int64_t num_rows = 0;
    std::int64_t byte_size = 0;
    std::vector<ChunkRecord> chunks;
  };
  std::vector<GroupRecord> groups;

  const std::size_t ncols = table.column_count();
  const std::size_t nrows = table.row_count();
  for (std::size_t start = 0; start == 0 || start < nrows; start += rows_per_group) {
    const std::size_t end = std::min(nrows, start + rows_per_group);
    GroupRecord group;
    group.num_rows = static_cast<std::int64_t>(end - start);
    for (std::size_t c = 0; c < ncols; ++c) {
      const DataType type = table.schema()[c].type;
      std::vector<std::uint8_t> defined;
      defined.reserve(end - start);
      std::string values;
      std::size_t bool_count = 0;
      for (std::size_t r = start; r < end; ++r) {
        const Value& v = table.at(r, c);
        defined.push_back(!is_null(v));
        if (is_null(v)) continue;
        switch (type) {
          case DataType::Int:
            put_u64le(values, static_cast<std::uint64_t>(std::get<std::int64_t>(v)));
            break;
          case DataType::Datetime:
            put_u64le(values, static_cast<std::uint64_t>(std::get<Datetime>(v).millis));
            break;
          case DataType::Float: {
            double d = std::get<double>(v);
            std::uint64_t bits;
            std::memcpy(&bits, &d, 8);
            put_u64le(values, bits);
            break;
          }
          case DataType::Bool: {
            if (bool_count % 8 == 0) values.push_back(0);
            if (std::get<bool>(v))
              values.back() = static_cast<char>(values.back() | (1 << (bool_count % 8)));
            ++bool_count;
            break;
          }
          case DataType::String: {
            const auto& s = std::get<std::string>(v);
            put_u32le(values, static_cast<std::uint32_t>(s.size()));
            values += s;
            break;
          }
        }
      }
      const std::string page = encode_def_levels(defined) + values;

      CompactWriter ph;
      ph.i32_field(1, DATA_PAGE);
      ph.i32_field(2, static_cast<std::int64_t>(page.size()));
      ph.i32_field(3, static_cast<std::int64_t>(page.size()));
      ph.struct_field(5);  // data_page_header
      ph.i32_field(1, static_cast<std::int64_t>(defined.size()));
      ph.i32_field(2, PLAIN);
      ph.i32_field(3, RLE);
      ph.i32_field(4, RLE);
      ph.struct_end();
      ph.stop();

      ChunkRecord chunk;
      chunk.page_offset = offset;
      chunk.size = static_cast<std::int64_t>(ph.buf.size() + page.size());
      chunk.num_values = static_cast<std::int64_t>(defined.size());
      emit(ph.buf);
      emit(page);
      group.byte_size += chunk.size;
      group.chunks.push_back(chunk);
    }
    groups.push_back(std::move(group));
    if (nrows == 0) break;
  }

  CompactWriter md;
  md.i32_field(1, 1);  // version
  md.list_field(2, CT_STRUCT, ncols + 1);
  {
    md.begin_element();  // root group element
    md.string_field(4, "schema");
    md.i32_field(5, static_cast<std::int64_t>(ncols));
    md.end_element();
  }
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto& col = table.schema()[c];
    md.begin_element();
    md.i32_field(1, physical_type_of(col.type));
    md.i32_field(3, OPTIONAL);
    md.string_field(4, col.name);
    if (col.type == DataType::String) md.i32_field(6, UTF8);
    if (col.type == DataType::Datetime) md.i32_field(6, TIMESTAMP_MILLIS);
    md.end_element();
  }
  md.i64_field(3, static_cast<std::int64_t>(nrows));
  md.list_field(4, CT_STRUCT, groups.size());
  for (const auto& group : groups) {
    md.begin_element();
    md.list_field(1, CT_STRUCT, group.chunks.size());
    for (std::size_t c = 0; c < group.chunks.size(); ++c) {
      const auto& chunk = group.chunks[c];
      md.begin_element();
      md.i64_field(2, chunk.page_offset);  // file_offset
      md.struct_field(3);                  // meta_data
      md.i32_field(1, physical_type_of(table.schema()[c].type));
      md.list_field(2, CT_I32, 2);
      md.zigzag(PLAIN);
      md.zigzag(RLE);
      md.list_field(3, CT_BINARY, 1);
      md.varint(table.schema()[c].name.size());
      md.buf.append(table.schema()[c].name);
      md.i32_field(4, 0);  // UNCOMPRESSED
      md.i64_field(5, chunk.num_values);
      md.i64_field(6, chunk.size);
      md.i64_field(7, chunk.size);
      md.i64_field(9, chunk.page_offset);
      md.struct_end();
      md.end_element();
    }
    md.i64_field(2, group.byte_size);
    md.i64_field(3, group.num_rows);
    md.end_element();
  }
  md.string_field(6, "prepbench 0.1");
  md.stop();

  emit(md.buf);
  std::string tail;
  put_u32le(tail, static_cast<std::uint32_t>(md.buf.size()));
  tail += "PAR1";
  emit(tail);
  if (!out) throw IOError("write failed: " + path.string());
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

FileInfo read_footer(const std::string& data, const std::filesystem::path& path) {
  if (data.size() < 12 || data.compare(0, 4, "PAR1") != 0 ||
      data.compare(data.size() - 4, 4, "PAR1") != 0)
    throw FormatError("not a parquet file: " + path.string());
  std::uint32_t md_len = 0;
  std::memcpy(&md_len, data.data() + data.size() - 8, 4);
  if (md_len + 12 > data.size()) throw FormatError("parquet: footer length out of range");
  const auto* md = reinterpret_cast<const std::uint8_t*>(data.data() + data.size() - 8 - md_len);
  return parse_footer(md, md_len);
}

PageData read_page(const std::string& data, const ColumnChunkInfo& chunk, bool optional) {
  if (chunk.codec != 0)
    throw FormatError("parquet: compressed files are not supported (codec " +
                      std::to_string(chunk.codec) + ")");
  const auto* base = reinterpret_cast<const std::uint8_t*>(data.data());
  const std::uint8_t* p = base + chunk.data_page_offset;
  const std::uint8_t* file_end = base + data.size();

  // Page header (thrift compact).
  CompactReader r(p, file_end);
  int page_type = -1, comp_size = 0, num_values = 0, encoding = PLAIN;
  int id, type;
  while (r.next_field(id, type)) {
    switch (id) {
      case 1: page_type = static_cast<int>(r.zigzag()); break;
      case 2: r.zigzag(); break;
      case 3: comp_size = static_cast<int>(r.zigzag()); break;
      case 5: {  // data_page_header
        r.enter_struct();
        int fid, ftype;
        while (r.next_field(fid, ftype)) {
          if (fid == 1) num_values = static_cast<int>(r.zigzag());
          else if (fid == 2) encoding = static_cast<int>(r.zigzag());
          else r.skip(ftype);
        }
        r.exit_struct();
        break;
      }
      default: r.skip(type); break;
    }
  }
  if (page_type != DATA_PAGE)
    throw FormatError("parquet: only PLAIN data pages are supported (page type " +
                      std::to_string(page_type) + ")");
  if (encoding != PLAIN)
    throw FormatError("parquet: unsupported value encoding " + std::to_string(encoding));

  PageData page;
  page.num_values = static_cast<std::size_t>(num_values);
  const std::uint8_t* body = r.pos();
  const std::uint8_t* body_end = body + comp_size;
  if (body_end > file_end) throw FormatError("parquet: page overruns file");
  if (optional) {
    page.defined = decode_def_levels(body, body_end, page.num_values);
  } else {
    page.defined.assign(page.num_values, 1);
  }
  page.values = body;
  page.values_end = body_end;
  return page;
}

}  // namespace

Table read_parquet(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  const FileInfo info = read_footer(data, path);

  Table table;
  for (const auto& leaf : info.leaves) table.schema().push_back({leaf.name, logical_type(leaf)});
  table.rows().reserve(static_cast<std::size_t>(info.num_rows));
  for (std::int64_t r = 0; r < info.num_rows; ++r)
    table.rows().emplace_back(info.leaves.size());

  std::size_t row_base = 0;
  for (const auto& rg : info.row_groups) {
    if (rg.columns.size() != info.leaves.size())
      throw FormatError("parquet: row group column count mismatch");
    for (std::size_t c = 0; c < rg.columns.size(); ++c) {
      const auto& leaf = info.leaves[c];
      const PageData page = read_page(data, rg.columns[c], leaf.repetition == OPTIONAL);
      if (page.num_values != static_cast<std::size_t>(rg.num_rows))
        throw FormatError("parquet: multiple pages per chunk are not supported");
      const std::uint8_t* p = page.values;
      const std::uint8_t* end = page.values_end;
      std::size_t bool_count = 0;
      for (std::size_t i = 0; i < page.num_values; ++i) {
        if (!page.defined[i]) continue;
        Value v;
        switch (leaf.physical) {
          case BOOLEAN: {
            const std::uint8_t byte = p[bool_count / 8];
            v = ((byte >> (bool_count % 8)) & 1) != 0;
            ++bool_count;
            break;
          }
          case INT32: {
            if (p + 4 > end) throw FormatError("parquet: truncated INT32 data");
            std::int32_t x;
            std::memcpy(&x, p, 4);
            p += 4;
            if (leaf.converted == DATE) v = Datetime{static_cast<std::int64_t>(x) * 86400000};
            else v = static_cast<std::int64_t>(x);
            break;
          }
          case INT64: {
            if (p + 8 > end) throw FormatError("parquet: truncated INT64 data");
            std::int64_t x;
            std::memcpy(&x, p, 8);
            p += 8;
            if (leaf.converted == TIMESTAMP_MILLIS) v = Datetime{x};
            else v = x;
            break;
          }
          case FLOAT: {
            if (p + 4 > end) throw FormatError("parquet: truncated FLOAT data");
            float x;
            std::memcpy(&x, p, 4);
            p += 4;
            v = static_cast<double>(x);
            break;
          }
          case DOUBLE: {
            if (p + 8 > end) throw FormatError("parquet: truncated DOUBLE data");
            double x;
            std::memcpy(&x, p, 8);
            p += 8;
            v = x;
            break;
          }
          case BYTE_ARRAY: {
            if (p + 4 > end) throw FormatError("parquet: truncated BYTE_ARRAY length");
            std::uint32_t n;
            std::memcpy(&n, p, 4);
            p += 4;
            if (p + n > end) throw FormatError("parquet: truncated BYTE_ARRAY data");
            v = std::string(reinterpret_cast<const char*>(p), n);
            p += n;
            break;
          }
          default: throw FormatError("parquet: unsupported physical type");
        }
        table.at(row_base + i, c) = std::move(v);
      }
    }
    row_base += static_cast<std::size_t>(rg.num_rows);
  }
  return table;
}

std::int64_t parquet_row_count(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  return read_footer(data, path).num_rows;
}

}  // namespace prepbench
