#include <array>
#include <fstream>
#include <random>

#include "prepbench/csv.hpp"
#include "prepbench/errors.hpp"
#include "prepbench/tpch.hpp"

namespace prepbench::tpch {

namespace {

struct NationRow {
  int key;
  const char* name;
  int region;
};

constexpr const char* kRegions[] = {"AFRICA", "AMERICA", "ASIA", "EUROPE", "MIDDLE EAST"};

constexpr NationRow kNations[] = {
    {0, "ALGERIA", 0},   {1, "ARGENTINA", 1}, {2, "BRAZIL", 1},        {3, "CANADA", 1},
    {4, "EGYPT", 4},     {5, "ETHIOPIA", 0},  {6, "FRANCE", 3},        {7, "GERMANY", 3},
    {8, "INDIA", 2},     {9, "INDONESIA", 2}, {10, "IRAN", 4},         {11, "IRAQ", 4},
    {12, "JAPAN", 2},    {13, "JORDAN", 4},   {14, "KENYA", 0},        {15, "MOROCCO", 0},
    {16, "MOZAMBIQUE", 0}, {17, "PERU", 1},   {18, "CHINA", 2},        {19, "ROMANIA", 3},
    {20, "SAUDI ARABIA", 4}, {21, "VIETNAM", 2}, {22, "RUSSIA", 3},    {23, "UNITED KINGDOM", 3},
    {24, "UNITED STATES", 1},
};

constexpr const char* kPartNameWords[] = {
    "almond",    "antique",   "aquamarine", "azure",     "beige",     "bisque",    "black",
    "blanched",  "blue",      "blush",      "brown",     "burlywood", "burnished", "chartreuse",
    "chiffon",   "chocolate", "coral",      "cornflower", "cornsilk", "cream",     "cyan",
    "dark",      "deep",      "dim",        "dodger",    "drab",      "firebrick", "floral",
    "forest",    "frosted",   "gainsboro",  "ghost",     "goldenrod", "green",     "grey",
    "honeydew",  "hot",       "indian",     "ivory",     "khaki",     "lace",      "lavender",
    "lawn",      "lemon",     "light",      "lime",      "linen",     "magenta",   "maroon",
    "medium",    "metallic",  "midnight",   "mint",      "misty",     "moccasin",  "navajo",
    "navy",      "olive",     "orange",     "orchid",    "pale",      "papaya",    "peach",
    "peru",      "pink",      "plum",       "powder",    "puff",      "purple",    "red",
    "rose",      "rosy",      "royal",      "saddle",    "salmon",    "sandy",     "seashell",
    "sienna",    "sky",       "slate",      "smoke",     "snow",      "spring",    "steel",
    "tan",       "thistle",   "tomato",     "turquoise", "violet",    "wheat",     "white",
    "yellow",
};

constexpr const char* kTypes1[] = {"STANDARD", "SMALL", "MEDIUM", "LARGE", "ECONOMY", "PROMO"};
constexpr const char* kTypes2[] = {"ANODIZED", "BURNISHED", "PLATED", "POLISHED", "BRUSHED"};
constexpr const char* kTypes3[] = {"TIN", "NICKEL", "BRASS", "STEEL", "COPPER"};
constexpr const char* kContainers1[] = {"SM", "LG", "MED", "JUMBO", "WRAP"};
constexpr const char* kContainers2[] = {"CASE", "BOX", "BAG", "JAR", "PKG", "PACK", "CAN", "DRUM"};
constexpr const char* kSegments[] = {"AUTOMOBILE", "BUILDING", "FURNITURE", "MACHINERY",
                                     "HOUSEHOLD"};
constexpr const char* kPriorities[] = {"1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED",
                                       "5-LOW"};
constexpr const char* kInstructs[] = {"DELIVER IN PERSON", "COLLECT COD", "NONE",
                                      "TAKE BACK RETURN"};
constexpr const char* kModes[] = {"REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"};
constexpr const char* kCommentWords[] = {
    "carefully", "quickly", "furiously", "slyly",   "blithely", "ironic",  "final",
    "pending",   "regular", "express",   "special", "bold",     "even",    "silent",
    "unusual",   "packages", "deposits", "accounts", "requests", "theodolites", "pinto",
    "beans",     "foxes",   "instructions", "dependencies", "platelets", "ideas", "sleep",
    "haggle",    "nag",     "wake",      "cajole",  "boost",    "detect",  "integrate",
};

class Rng {
public:
  explicit Rng(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    return n == 0 ? 0 : static_cast<std::uint64_t>(
                            (static_cast<unsigned __int128>(rng_()) * n) >> 64);
  }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  template <std::size_t N>
  const char* pick(const char* const (&arr)[N]) {
    return arr[below(N)];
  }

private:
  std::mt19937_64 rng_;
};

std::string money(std::int64_t cents) {
  const bool neg = cents < 0;
  if (neg) cents = -cents;
  std::string s = std::to_string(cents / 100) + "." +
                  (cents % 100 < 10 ? "0" : "") + std::to_string(cents % 100);
  return neg ? "-" + s : s;
}

std::string date_text(const Datetime& d) { return format_datetime(d, "%Y-%m-%d"); }

std::string padded_key(std::int64_t key) {
  std::string digits = std::to_string(key);
  return std::string(digits.size() >= 9 ? 0 : 9 - digits.size(), '0') + digits;
}

std::string comment(Rng& rng, int words) {
  std::string out;
  for (int i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += rng.pick(kCommentWords);
  }
  return out;
}

std::string phone(Rng& rng, int nationkey) {
  std::string out = std::to_string(nationkey + 10);
  out += "-" + std::to_string(rng.range(100, 999));
  out += "-" + std::to_string(rng.range(100, 999));
  out += "-" + std::to_string(rng.range(1000, 9999));
  return out;
}

// Official retail price formula, in cents.
std::int64_t retail_price_cents(std::int64_t partkey) {
  return 90000 + (partkey / 10) % 20001 + 100 * (partkey % 1000);
}

class TblWriter {
public:
  TblWriter(const std::filesystem::path& dir, const std::string& table)
      : out_(dir / (table + ".tbl"), std::ios::binary | std::ios::trunc) {
    if (!out_) throw IOError("cannot write " + (dir / (table + ".tbl")).string());
  }
  void row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) {
      out_ << f;
      out_ << '|';
    }
    out_ << '\n';
  }
  ~TblWriter() { out_.flush(); }

private:
  std::ofstream out_;
};

}  // namespace

std::vector<ColumnSpec> table_schema(const std::string& table) {
  using DT = DataType;
  if (table == "region")
    return {{"r_regionkey", DT::Int}, {"r_name", DT::String}, {"r_comment", DT::String}};
  if (table == "nation")
    return {{"n_nationkey", DT::Int},
            {"n_name", DT::String},
            {"n_regionkey", DT::Int},
            {"n_comment", DT::String}};
  if (table == "supplier")
    return {{"s_suppkey", DT::Int},   {"s_name", DT::String}, {"s_address", DT::String},
            {"s_nationkey", DT::Int}, {"s_phone", DT::String}, {"s_acctbal", DT::Float},
            {"s_comment", DT::String}};
  if (table == "customer")
    return {{"c_custkey", DT::Int},   {"c_name", DT::String},  {"c_address", DT::String},
            {"c_nationkey", DT::Int}, {"c_phone", DT::String}, {"c_acctbal", DT::Float},
            {"c_mktsegment", DT::String}, {"c_comment", DT::String}};
  if (table == "part")
    return {{"p_partkey", DT::Int},  {"p_name", DT::String},      {"p_mfgr", DT::String},
            {"p_brand", DT::String}, {"p_type", DT::String},      {"p_size", DT::Int},
            {"p_container", DT::String}, {"p_retailprice", DT::Float}, {"p_comment", DT::String}};
  if (table == "partsupp")
    return {{"ps_partkey", DT::Int},
            {"ps_suppkey", DT::Int},
            {"ps_availqty", DT::Int},
            {"ps_supplycost", DT::Float},
            {"ps_comment", DT::String}};
  if (table == "orders")
    return {{"o_orderkey", DT::Int},       {"o_custkey", DT::Int},
            {"o_orderstatus", DT::String}, {"o_totalprice", DT::Float},
            {"o_orderdate", DT::Datetime}, {"o_orderpriority", DT::String},
            {"o_clerk", DT::String},       {"o_shippriority", DT::Int},
            {"o_comment", DT::String}};
  if (table == "lineitem")
    return {{"l_orderkey", DT::Int},      {"l_partkey", DT::Int},
            {"l_suppkey", DT::Int},       {"l_linenumber", DT::Int},
            {"l_quantity", DT::Float},    {"l_extendedprice", DT::Float},
            {"l_discount", DT::Float},    {"l_tax", DT::Float},
            {"l_returnflag", DT::String}, {"l_linestatus", DT::String},
            {"l_shipdate", DT::Datetime}, {"l_commitdate", DT::Datetime},
            {"l_receiptdate", DT::Datetime}, {"l_shipinstruct", DT::String},
            {"l_shipmode", DT::String},   {"l_comment", DT::String}};
  throw InvalidArgument("unknown TPC-H table '" + table + "'");
}

void generate(const std::filesystem::path& data_dir, ScaleFactor sf, std::uint64_t seed) {
  if (sf.sf <= 0) throw InvalidArgument("scale factor must be positive");
  std::filesystem::create_directories(data_dir);
  Rng rng(seed);

  const auto scaled = [&](double base) {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(base * sf.sf));
  };
  const std::int64_t n_supplier = scaled(10000);
  const std::int64_t n_customer = scaled(150000);
  const std::int64_t n_part = scaled(200000);
  const std::int64_t n_orders = scaled(1500000);

  {
    TblWriter w(data_dir, "region");
    for (int r = 0; r < 5; ++r)
      w.row({std::to_string(r), kRegions[r], comment(rng, 6)});
  }
  {
    TblWriter w(data_dir, "nation");
    for (const auto& n : kNations)
      w.row({std::to_string(n.key), n.name, std::to_string(n.region), comment(rng, 6)});
  }
  {
    TblWriter w(data_dir, "supplier");
    for (std::int64_t k = 1; k <= n_supplier; ++k) {
      const int nation = static_cast<int>(rng.below(25));
      std::string cmt = comment(rng, 6);
      if (rng.below(20) == 0) cmt += " Customer Complaints";  // q16 filter target
      w.row({std::to_string(k), "Supplier#" + padded_key(k), comment(rng, 2),
             std::to_string(nation), phone(rng, nation), money(rng.range(-99999, 999999)), cmt});
    }
  }
  {
    TblWriter w(data_dir, "customer");
    for (std::int64_t k = 1; k <= n_customer; ++k) {
      const int nation = static_cast<int>(rng.below(25));
      w.row({std::to_string(k), "Customer#" + padded_key(k), comment(rng, 2),
             std::to_string(nation), phone(rng, nation), money(rng.range(-99999, 999999)),
             rng.pick(kSegments), comment(rng, 8)});
    }
  }
  {
    TblWriter w(data_dir, "part");
    for (std::int64_t k = 1; k <= n_part; ++k) {
      std::string name;
      std::uint64_t used[5];
      for (int i = 0; i < 5; ++i) {
        std::uint64_t wi;
        bool fresh;
        do {
          wi = rng.below(std::size(kPartNameWords));
          fresh = true;
          for (int j = 0; j < i; ++j) fresh &= used[j] != wi;
        } while (!fresh);
        used[i] = wi;
        if (i) name += ' ';
        name += kPartNameWords[wi];
      }
      const int mfgr = static_cast<int>(rng.range(1, 5));
      const int brand = mfgr * 10 + static_cast<int>(rng.range(1, 5));
      const std::string type = std::string(rng.pick(kTypes1)) + " " + rng.pick(kTypes2) + " " +
                               rng.pick(kTypes3);
      const std::string container = std::string(rng.pick(kContainers1)) + " " +
                                    rng.pick(kContainers2);
      w.row({std::to_string(k), name, "Manufacturer#" + std::to_string(mfgr),
             "Brand#" + std::to_string(brand), type, std::to_string(rng.range(1, 50)), container,
             money(retail_price_cents(k)), comment(rng, 3)});
    }
  }
  {
    TblWriter w(data_dir, "partsupp");
    for (std::int64_t p = 1; p <= n_part; ++p) {
      const std::int64_t stride = std::max<std::int64_t>(1, n_supplier / 4);
      std::vector<std::int64_t> supps;
      for (int i = 0; i < 4 && static_cast<std::int64_t>(supps.size()) < n_supplier; ++i) {
        std::int64_t s = ((p + i * stride) % n_supplier) + 1;
        while (std::find(supps.begin(), supps.end(), s) != supps.end())
          s = s % n_supplier + 1;
        supps.push_back(s);
        w.row({std::to_string(p), std::to_string(s), std::to_string(rng.range(1, 9999)),
               money(rng.range(100, 100000)), comment(rng, 6)});
      }
    }
  }
  {
    TblWriter orders_w(data_dir, "orders");
    TblWriter lineitem_w(data_dir, "lineitem");
    const Datetime start = make_date(1992, 1, 1);
    const std::int64_t order_span_days = days_from_civil(1998, 8, 2) - days_from_civil(1992, 1, 1);
    const std::int64_t cutoff_days = days_from_civil(1995, 6, 17);

    for (std::int64_t o = 1; o <= n_orders; ++o) {
      // A third of customers never place orders (custkey multiples of 3).
      std::int64_t cust = rng.range(1, n_customer);
      while (n_customer >= 3 && cust % 3 == 0) cust = rng.range(1, n_customer);

      const Datetime orderdate = add_days(start, rng.range(0, order_span_days));
      const int n_lines = static_cast<int>(rng.range(1, 7));
      std::int64_t total_cents = 0;
      int f_count = 0, o_count = 0;
      struct Line {
        std::vector<std::string> fields;
      };
      std::vector<Line> lines;
      for (int ln = 1; ln <= n_lines; ++ln) {
        const std::int64_t partkey = rng.range(1, n_part);
        const std::int64_t suppkey = rng.range(1, n_supplier);
        const std::int64_t quantity = rng.range(1, 50);
        const std::int64_t ext_cents = quantity * retail_price_cents(partkey);
        const std::int64_t disc = rng.range(0, 10);  // percent
        const std::int64_t tax = rng.range(0, 8);
        const Datetime shipdate = add_days(orderdate, rng.range(1, 121));
        const Datetime commitdate = add_days(orderdate, rng.range(30, 90));
        const Datetime receiptdate = add_days(shipdate, rng.range(1, 30));
        const bool shipped_late_era = shipdate.millis / 86400000 > cutoff_days;
        const bool received_early_era = receiptdate.millis / 86400000 <= cutoff_days;
        const char* returnflag = received_early_era ? (rng.below(2) ? "R" : "A") : "N";
        const char* linestatus = shipped_late_era ? "O" : "F";
        (shipped_late_era ? o_count : f_count) += 1;
        total_cents += ext_cents * (100 + tax) / 100 * (100 - disc) / 100;

        Line line;
        line.fields = {std::to_string(o),
                       std::to_string(partkey),
                       std::to_string(suppkey),
                       std::to_string(ln),
                       std::to_string(quantity),
                       money(ext_cents),
                       money(disc),  // percent as a 0.00-0.10 decimal
                       money(tax),
                       returnflag,
                       linestatus,
                       date_text(shipdate),
                       date_text(commitdate),
                       date_text(receiptdate),
                       rng.pick(kInstructs),
                       rng.pick(kModes),
                       comment(rng, 4)};
        lines.push_back(std::move(line));
      }
      const char* status = f_count == n_lines ? "F" : (o_count == n_lines ? "O" : "P");
      orders_w.row({std::to_string(o), std::to_string(cust), status, money(total_cents),
                    date_text(orderdate), rng.pick(kPriorities),
                    "Clerk#" + padded_key(rng.range(1, std::max<std::int64_t>(1, n_orders / 1000))),
                    "0", comment(rng, 8)});
      for (const auto& line : lines) lineitem_w.row(line.fields);
    }
  }
}

Table load_table(const std::filesystem::path& data_dir, const std::string& table) {
  const auto path = data_dir / (table + ".tbl");
  if (!std::filesystem::exists(path)) throw MissingTable(table);
  CsvOptions opts;
  opts.delimiter = '|';
  opts.has_header = false;
  opts.ignore_trailing_delimiter = true;
  opts.schema = table_schema(table);
  opts.null_tokens = {};  // TPC-H data carries no nulls
  try {
    return read_csv(path, opts);
  } catch (const ParseError& e) {
    throw SchemaMismatch(table + ": " + e.what());
  } catch (const FormatError& e) {
    throw SchemaMismatch(table + ": " + e.what());
  }
}

void load_tpch(Adapter& adapter, const std::filesystem::path& data_dir, ScaleFactor) {
  for (const char* table : kTables) {
    const Table t = load_table(data_dir, table);
    adapter.register_table(table, adapter.from_table(t));
  }
}

}  // namespace prepbench::tpch
