#include <map>
#include <mutex>

#include "prepbench/errors.hpp"
#include "prepbench/tpch.hpp"

// The 22 query plans re-expressed over the preparator vocabulary, following
// the common dataframe translations of the official SQL. Deviations from the
// official text: q19 uses the generator's 'REG AIR' ship-mode token, and
// LIMIT clauses are applied by the runner on the canonical result.

namespace prepbench::tpch {

namespace {

using nlohmann::json;

PlanStep S(Preparator op, const std::string& args, std::string input = "",
           std::string save_as = "") {
  PlanStep s;
  s.op = validate_call({op, json::parse(args)});
  s.input = std::move(input);
  s.save_as = std::move(save_as);
  return s;
}

std::string drop_list(const std::vector<std::string>& cols) {
  json j{{"columns", cols}};
  return j.dump();
}

TpchQuery q01() {
  TpchQuery q{"q01", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "l_shipdate <= date(\"1998-09-02\")"})pb", "lineitem"),
      S(Preparator::CalcCol, R"pb({"column": "disc_price", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "charge", "expr": "l_extendedprice * (1.0 - l_discount) * (1.0 + l_tax)"})pb"),
      S(Preparator::Group, R"pb({"by": ["l_returnflag", "l_linestatus"], "aggs": {
          "sum_qty": {"col": "l_quantity", "fn": "sum"},
          "sum_base_price": {"col": "l_extendedprice", "fn": "sum"},
          "sum_disc_price": {"col": "disc_price", "fn": "sum"},
          "sum_charge": {"col": "charge", "fn": "sum"},
          "avg_qty": {"col": "l_quantity", "fn": "mean"},
          "avg_price": {"col": "l_extendedprice", "fn": "mean"},
          "avg_disc": {"col": "l_discount", "fn": "mean"},
          "count_order": {"col": "l_orderkey", "fn": "count"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["l_returnflag", "l_linestatus"]})pb"),
  };
  return q;
}

TpchQuery q02() {
  TpchQuery q{"q02", {}, true, 100};
  q.plan = {
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["ps_suppkey"], "right_on": ["s_suppkey"]})pb", "partsupp"),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Join, R"pb({"other": "region", "left_on": ["n_regionkey"], "right_on": ["r_regionkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "r_name == \"EUROPE\""})pb"),
      S(Preparator::Drop, drop_list({"ps_suppkey", "ps_availqty", "ps_comment", "s_suppkey",
                                     "s_nationkey", "n_nationkey", "n_regionkey", "n_comment",
                                     "r_regionkey", "r_name", "r_comment"}),
        "", "eps"),
      S(Preparator::Group, R"pb({"by": ["ps_partkey"], "aggs": {"min_cost": {"col": "ps_supplycost", "fn": "min"}}})pb",
        "eps", "mincost"),
      S(Preparator::Query, R"pb({"expr": "p_size == 15 and endswith(p_type, \"BRASS\")"})pb", "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_brand", "p_type", "p_size", "p_container",
                                     "p_retailprice", "p_comment"})),
      S(Preparator::Join, R"pb({"other": "eps", "left_on": ["p_partkey"], "right_on": ["ps_partkey"]})pb"),
      S(Preparator::Join, R"pb({"other": "mincost", "left_on": ["p_partkey"], "right_on": ["ps_partkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "ps_supplycost == min_cost"})pb"),
      S(Preparator::Drop, drop_list({"ps_partkey", "ps_partkey_r", "ps_supplycost", "min_cost"})),
      S(Preparator::Sort, R"pb({"by": ["s_acctbal", "n_name", "s_name", "p_partkey"],
                              "ascending": [false, true, true, true]})pb"),
  };
  return q;
}

TpchQuery q03() {
  TpchQuery q{"q03", {}, true, 10};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "l_shipdate > date(\"1995-03-15\")"})pb", "lineitem"),
      S(Preparator::Drop, drop_list({"l_partkey", "l_suppkey", "l_linenumber", "l_quantity",
                                     "l_tax", "l_returnflag", "l_linestatus", "l_shipdate",
                                     "l_commitdate", "l_receiptdate", "l_shipinstruct",
                                     "l_shipmode", "l_comment"}),
        "", "l3"),
      S(Preparator::Query, R"pb({"expr": "c_mktsegment == \"BUILDING\""})pb", "customer"),
      S(Preparator::Drop, drop_list({"c_name", "c_address", "c_nationkey", "c_phone", "c_acctbal",
                                     "c_mktsegment", "c_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["c_custkey"], "right_on": ["o_custkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "o_orderdate < date(\"1995-03-15\")"})pb"),
      S(Preparator::Drop, drop_list({"c_custkey", "o_custkey", "o_orderstatus", "o_totalprice",
                                     "o_orderpriority", "o_clerk", "o_comment"})),
      S(Preparator::Join, R"pb({"other": "l3", "left_on": ["o_orderkey"], "right_on": ["l_orderkey"]})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": ["l_orderkey", "o_orderdate", "o_shippriority"],
                               "aggs": {"revenue": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["revenue", "o_orderdate"], "ascending": [false, true]})pb"),
  };
  return q;
}

TpchQuery q04() {
  TpchQuery q{"q04", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "l_commitdate < l_receiptdate"})pb", "lineitem"),
      S(Preparator::Drop, drop_list({"l_partkey", "l_suppkey", "l_linenumber", "l_quantity",
                                     "l_extendedprice", "l_discount", "l_tax", "l_returnflag",
                                     "l_linestatus", "l_shipdate", "l_commitdate",
                                     "l_receiptdate", "l_shipinstruct", "l_shipmode",
                                     "l_comment"})),
      S(Preparator::Dedup, R"pb({})pb", "", "late4"),
      S(Preparator::Query,
        R"pb({"expr": "o_orderdate >= date(\"1993-07-01\") and o_orderdate < date(\"1993-10-01\")"})pb",
        "orders"),
      S(Preparator::Join, R"pb({"other": "late4", "left_on": ["o_orderkey"], "right_on": ["l_orderkey"]})pb"),
      S(Preparator::Group, R"pb({"by": ["o_orderpriority"], "aggs": {"order_count": {"col": "o_orderkey", "fn": "count"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["o_orderpriority"]})pb"),
  };
  return q;
}

TpchQuery q05() {
  TpchQuery q{"q05", {}, true, -1};
  q.plan = {
      S(Preparator::Drop, drop_list({"c_name", "c_address", "c_phone", "c_acctbal",
                                     "c_mktsegment", "c_comment"}),
        "customer"),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["c_custkey"], "right_on": ["o_custkey"]})pb"),
      S(Preparator::Query,
        R"pb({"expr": "o_orderdate >= date(\"1994-01-01\") and o_orderdate < date(\"1995-01-01\")"})pb"),
      S(Preparator::Drop, drop_list({"c_custkey", "o_custkey", "o_orderstatus", "o_totalprice",
                                     "o_orderdate", "o_orderpriority", "o_clerk",
                                     "o_shippriority", "o_comment"})),
      S(Preparator::Join, R"pb({"other": "lineitem", "left_on": ["o_orderkey"], "right_on": ["l_orderkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_orderkey", "l_orderkey", "l_partkey", "l_linenumber",
                                     "l_quantity", "l_tax", "l_returnflag", "l_linestatus",
                                     "l_shipdate", "l_commitdate", "l_receiptdate",
                                     "l_shipinstruct", "l_shipmode", "l_comment"})),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "c_nationkey == s_nationkey"})pb"),
      S(Preparator::Drop, drop_list({"l_suppkey", "s_suppkey", "s_name", "s_address", "s_phone",
                                     "s_acctbal", "s_comment", "c_nationkey"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Join, R"pb({"other": "region", "left_on": ["n_regionkey"], "right_on": ["r_regionkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "r_name == \"ASIA\""})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": ["n_name"], "aggs": {"revenue": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["revenue"], "ascending": false})pb"),
  };
  return q;
}

TpchQuery q06() {
  TpchQuery q{"q06", {}, false, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "l_shipdate >= date(\"1994-01-01\") and l_shipdate < date(\"1995-01-01\") and l_discount >= 0.05 and l_discount <= 0.07 and l_quantity < 24.0"})pb",
        "lineitem"),
      S(Preparator::CalcCol, R"pb({"column": "rev", "expr": "l_extendedprice * l_discount"})pb"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"revenue": {"col": "rev", "fn": "sum"}}})pb"),
  };
  return q;
}

TpchQuery q07() {
  TpchQuery q{"q07", {}, true, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "l_shipdate >= date(\"1995-01-01\") and l_shipdate <= date(\"1996-12-31\")"})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"l_partkey", "l_linenumber", "l_quantity", "l_tax",
                                     "l_returnflag", "l_linestatus", "l_commitdate",
                                     "l_receiptdate", "l_shipinstruct", "l_shipmode",
                                     "l_comment"})),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb"),
      S(Preparator::Drop, drop_list({"l_suppkey", "s_suppkey", "s_name", "s_address", "s_phone",
                                     "s_acctbal", "s_comment"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Rename, R"pb({"columns": {"n_name": "supp_nation"}})pb"),
      S(Preparator::Drop, drop_list({"s_nationkey", "n_nationkey", "n_regionkey", "n_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["l_orderkey"], "right_on": ["o_orderkey"]})pb"),
      S(Preparator::Drop, drop_list({"l_orderkey", "o_orderkey", "o_orderstatus", "o_totalprice",
                                     "o_orderdate", "o_orderpriority", "o_clerk",
                                     "o_shippriority", "o_comment"})),
      S(Preparator::Join, R"pb({"other": "customer", "left_on": ["o_custkey"], "right_on": ["c_custkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_custkey", "c_custkey", "c_name", "c_address", "c_phone",
                                     "c_acctbal", "c_mktsegment", "c_comment"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["c_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Rename, R"pb({"columns": {"n_name": "cust_nation"}})pb"),
      S(Preparator::Drop, drop_list({"c_nationkey", "n_nationkey", "n_regionkey", "n_comment"})),
      S(Preparator::Query,
        R"pb({"expr": "(supp_nation == \"FRANCE\" and cust_nation == \"GERMANY\") or (supp_nation == \"GERMANY\" and cust_nation == \"FRANCE\")"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "l_year", "expr": "year(l_shipdate)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": ["supp_nation", "cust_nation", "l_year"],
                               "aggs": {"revenue": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["supp_nation", "cust_nation", "l_year"]})pb"),
  };
  return q;
}

TpchQuery q08() {
  TpchQuery q{"q08", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "p_type == \"ECONOMY ANODIZED STEEL\""})pb", "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_mfgr", "p_brand", "p_type", "p_size",
                                     "p_container", "p_retailprice", "p_comment"}),
        "", "p8"),
      S(Preparator::Join, R"pb({"other": "p8", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"p_partkey", "l_partkey", "l_linenumber", "l_quantity",
                                     "l_tax", "l_returnflag", "l_linestatus", "l_shipdate",
                                     "l_commitdate", "l_receiptdate", "l_shipinstruct",
                                     "l_shipmode", "l_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["l_orderkey"], "right_on": ["o_orderkey"]})pb"),
      S(Preparator::Query,
        R"pb({"expr": "o_orderdate >= date(\"1995-01-01\") and o_orderdate <= date(\"1996-12-31\")"})pb"),
      S(Preparator::Drop, drop_list({"l_orderkey", "o_orderkey", "o_orderstatus", "o_totalprice",
                                     "o_orderpriority", "o_clerk", "o_shippriority",
                                     "o_comment"})),
      S(Preparator::Join, R"pb({"other": "customer", "left_on": ["o_custkey"], "right_on": ["c_custkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_custkey", "c_custkey", "c_name", "c_address", "c_phone",
                                     "c_acctbal", "c_mktsegment", "c_comment"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["c_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Join, R"pb({"other": "region", "left_on": ["n_regionkey"], "right_on": ["r_regionkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "r_name == \"AMERICA\""})pb"),
      S(Preparator::Drop, drop_list({"c_nationkey", "n_nationkey", "n_name", "n_regionkey",
                                     "n_comment", "r_regionkey", "r_name", "r_comment"})),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb"),
      S(Preparator::Drop, drop_list({"l_suppkey", "s_suppkey", "s_name", "s_address", "s_phone",
                                     "s_acctbal", "s_comment"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::CalcCol, R"pb({"column": "o_year", "expr": "year(o_orderdate)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "brazil_volume", "expr": "if(n_name == \"BRAZIL\", volume, 0.0)"})pb"),
      S(Preparator::Group, R"pb({"by": ["o_year"], "aggs": {"num": {"col": "brazil_volume", "fn": "sum"},
                                                          "den": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "mkt_share", "expr": "num / den"})pb"),
      S(Preparator::Drop, drop_list({"num", "den"})),
      S(Preparator::Sort, R"pb({"by": ["o_year"]})pb"),
  };
  return q;
}

TpchQuery q09() {
  TpchQuery q{"q09", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "contains(p_name, \"green\")"})pb", "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_mfgr", "p_brand", "p_type", "p_size",
                                     "p_container", "p_retailprice", "p_comment"}),
        "", "p9"),
      S(Preparator::Join, R"pb({"other": "p9", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"p_partkey", "l_linenumber", "l_tax", "l_returnflag",
                                     "l_linestatus", "l_shipdate", "l_commitdate",
                                     "l_receiptdate", "l_shipinstruct", "l_shipmode",
                                     "l_comment"})),
      S(Preparator::Join, R"pb({"other": "partsupp", "left_on": ["l_suppkey", "l_partkey"],
                              "right_on": ["ps_suppkey", "ps_partkey"]})pb"),
      S(Preparator::Drop, drop_list({"ps_partkey", "ps_suppkey", "ps_availqty", "ps_comment"})),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb"),
      S(Preparator::Drop, drop_list({"s_suppkey", "s_name", "s_address", "s_phone", "s_acctbal",
                                     "s_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["l_orderkey"], "right_on": ["o_orderkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_orderkey", "o_custkey", "o_orderstatus", "o_totalprice",
                                     "o_orderpriority", "o_clerk", "o_shippriority",
                                     "o_comment"})),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Rename, R"pb({"columns": {"n_name": "nation"}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "o_year", "expr": "year(o_orderdate)"})pb"),
      S(Preparator::CalcCol,
        R"pb({"column": "amount", "expr": "l_extendedprice * (1.0 - l_discount) - ps_supplycost * l_quantity"})pb"),
      S(Preparator::Group, R"pb({"by": ["nation", "o_year"], "aggs": {"sum_profit": {"col": "amount", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["nation", "o_year"], "ascending": [true, false]})pb"),
  };
  return q;
}

TpchQuery q10() {
  TpchQuery q{"q10", {}, true, 20};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "o_orderdate >= date(\"1993-10-01\") and o_orderdate < date(\"1994-01-01\")"})pb",
        "orders"),
      S(Preparator::Drop, drop_list({"o_orderstatus", "o_totalprice", "o_orderdate",
                                     "o_orderpriority", "o_clerk", "o_shippriority",
                                     "o_comment"})),
      S(Preparator::Join, R"pb({"other": "lineitem", "left_on": ["o_orderkey"], "right_on": ["l_orderkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "l_returnflag == \"R\""})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": ["o_custkey"], "aggs": {"revenue": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::Join, R"pb({"other": "customer", "left_on": ["o_custkey"], "right_on": ["c_custkey"]})pb"),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["c_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_custkey", "c_nationkey", "c_mktsegment", "n_nationkey",
                                     "n_regionkey", "n_comment"})),
      S(Preparator::Sort, R"pb({"by": ["revenue"], "ascending": false})pb"),
  };
  return q;
}

TpchQuery q11(ScaleFactor sf) {
  char threshold_expr[64];
  std::snprintf(threshold_expr, sizeof threshold_expr, "total * %.10f", 0.0001 / sf.sf);
  TpchQuery q{"q11", {}, true, -1};
  q.plan = {
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb",
        "supplier"),
      S(Preparator::Query, R"pb({"expr": "n_name == \"GERMANY\""})pb"),
      S(Preparator::Drop, drop_list({"s_name", "s_address", "s_nationkey", "s_phone", "s_acctbal",
                                     "s_comment", "n_nationkey", "n_name", "n_regionkey",
                                     "n_comment"}),
        "", "gs11"),
      S(Preparator::Join, R"pb({"other": "gs11", "left_on": ["ps_suppkey"], "right_on": ["s_suppkey"]})pb",
        "partsupp"),
      S(Preparator::CalcCol, R"pb({"column": "val", "expr": "ps_supplycost * ps_availqty"})pb"),
      S(Preparator::Drop, drop_list({"ps_suppkey", "s_suppkey", "ps_availqty", "ps_supplycost",
                                     "ps_comment"}),
        "", "gps11"),
      S(Preparator::Group, R"pb({"by": ["ps_partkey"], "aggs": {"value": {"col": "val", "fn": "sum"}}})pb",
        "gps11", "byparts11"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"total": {"col": "val", "fn": "sum"}}})pb", "gps11"),
      S(Preparator::CalcCol, std::string(R"pb({"column": "threshold", "expr": ")pb") + threshold_expr + R"pb("})pb"),
      S(Preparator::Drop, drop_list({"total"}), "", "thresh11"),
      S(Preparator::Join, R"pb({"other": "thresh11", "how": "inner"})pb", "byparts11"),
      S(Preparator::Query, R"pb({"expr": "value > threshold"})pb"),
      S(Preparator::Drop, drop_list({"threshold"})),
      S(Preparator::Sort, R"pb({"by": ["value"], "ascending": false})pb"),
  };
  return q;
}

TpchQuery q12() {
  TpchQuery q{"q12", {}, true, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "l_shipmode in (\"MAIL\", \"SHIP\") and l_commitdate < l_receiptdate and l_shipdate < l_commitdate and l_receiptdate >= date(\"1994-01-01\") and l_receiptdate < date(\"1995-01-01\")"})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"l_partkey", "l_suppkey", "l_linenumber", "l_quantity",
                                     "l_extendedprice", "l_discount", "l_tax", "l_returnflag",
                                     "l_linestatus", "l_shipdate", "l_commitdate",
                                     "l_receiptdate", "l_shipinstruct", "l_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["l_orderkey"], "right_on": ["o_orderkey"]})pb"),
      S(Preparator::CalcCol,
        R"pb({"column": "high", "expr": "if(o_orderpriority == \"1-URGENT\" or o_orderpriority == \"2-HIGH\", 1, 0)"})pb"),
      S(Preparator::CalcCol,
        R"pb({"column": "low", "expr": "if(o_orderpriority != \"1-URGENT\" and o_orderpriority != \"2-HIGH\", 1, 0)"})pb"),
      S(Preparator::Group, R"pb({"by": ["l_shipmode"], "aggs": {"high_line_count": {"col": "high", "fn": "sum"},
                                                              "low_line_count": {"col": "low", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["l_shipmode"]})pb"),
  };
  return q;
}

TpchQuery q13() {
  TpchQuery q{"q13", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "not matches(o_comment, \"special.*requests\")"})pb", "orders"),
      S(Preparator::Drop, drop_list({"o_orderstatus", "o_totalprice", "o_orderdate",
                                     "o_orderpriority", "o_clerk", "o_shippriority",
                                     "o_comment"}),
        "", "o13"),
      S(Preparator::Drop, drop_list({"c_name", "c_address", "c_nationkey", "c_phone", "c_acctbal",
                                     "c_mktsegment", "c_comment"}),
        "customer"),
      S(Preparator::Join, R"pb({"other": "o13", "left_on": ["c_custkey"], "right_on": ["o_custkey"], "how": "left"})pb"),
      S(Preparator::Group, R"pb({"by": ["c_custkey"], "aggs": {"c_count": {"col": "o_orderkey", "fn": "count"}}})pb"),
      S(Preparator::Group, R"pb({"by": ["c_count"], "aggs": {"custdist": {"col": "c_custkey", "fn": "count"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["custdist", "c_count"], "ascending": [false, false]})pb"),
  };
  return q;
}

TpchQuery q14() {
  TpchQuery q{"q14", {}, false, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "l_shipdate >= date(\"1995-09-01\") and l_shipdate < date(\"1995-10-01\")"})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"l_orderkey", "l_suppkey", "l_linenumber", "l_quantity",
                                     "l_tax", "l_returnflag", "l_linestatus", "l_shipdate",
                                     "l_commitdate", "l_receiptdate", "l_shipinstruct",
                                     "l_shipmode", "l_comment"})),
      S(Preparator::Join, R"pb({"other": "part", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "promo", "expr": "if(startswith(p_type, \"PROMO\"), volume, 0.0)"})pb"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"num": {"col": "promo", "fn": "sum"},
                                                  "den": {"col": "volume", "fn": "sum"}}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "promo_revenue", "expr": "100.0 * num / den"})pb"),
      S(Preparator::Drop, drop_list({"num", "den"})),
  };
  return q;
}

TpchQuery q15() {
  TpchQuery q{"q15", {}, true, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "l_shipdate >= date(\"1996-01-01\") and l_shipdate < date(\"1996-04-01\")"})pb",
        "lineitem"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": ["l_suppkey"], "aggs": {"total_revenue": {"col": "volume", "fn": "sum"}}})pb",
        "", "revenue0"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"max_rev": {"col": "total_revenue", "fn": "max"}}})pb",
        "", "maxrev"),
      S(Preparator::Join, R"pb({"other": "maxrev", "how": "inner"})pb", "revenue0"),
      S(Preparator::Query, R"pb({"expr": "total_revenue == max_rev"})pb"),
      S(Preparator::Drop, drop_list({"max_rev"})),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb"),
      S(Preparator::Drop, drop_list({"l_suppkey", "s_nationkey", "s_acctbal", "s_comment"})),
      S(Preparator::Sort, R"pb({"by": ["s_suppkey"]})pb"),
  };
  return q;
}

TpchQuery q16() {
  TpchQuery q{"q16", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "matches(s_comment, \"Customer.*Complaints\")"})pb", "supplier"),
      S(Preparator::Drop, drop_list({"s_name", "s_address", "s_nationkey", "s_phone", "s_acctbal",
                                     "s_comment"}),
        "", "bad16"),
      S(Preparator::Query,
        R"pb({"expr": "p_brand != \"Brand#45\" and not startswith(p_type, \"MEDIUM POLISHED\") and p_size in (49, 14, 23, 45, 19, 3, 36, 9)"})pb",
        "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_mfgr", "p_container", "p_retailprice",
                                     "p_comment"})),
      S(Preparator::Join, R"pb({"other": "partsupp", "left_on": ["p_partkey"], "right_on": ["ps_partkey"]})pb"),
      S(Preparator::Drop, drop_list({"p_partkey", "ps_partkey", "ps_availqty", "ps_supplycost",
                                     "ps_comment"})),
      S(Preparator::Join, R"pb({"other": "bad16", "left_on": ["ps_suppkey"], "right_on": ["s_suppkey"], "how": "left"})pb"),
      S(Preparator::Query, R"pb({"expr": "is_null(s_suppkey)"})pb"),
      S(Preparator::Drop, drop_list({"s_suppkey"})),
      S(Preparator::Group, R"pb({"by": ["p_brand", "p_type", "p_size"],
                               "aggs": {"supplier_cnt": {"col": "ps_suppkey", "fn": "nunique"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["supplier_cnt", "p_brand", "p_type", "p_size"],
                              "ascending": [false, true, true, true]})pb"),
  };
  return q;
}

TpchQuery q17() {
  TpchQuery q{"q17", {}, false, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "p_brand == \"Brand#23\" and p_container == \"MED BOX\""})pb",
        "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_mfgr", "p_brand", "p_type", "p_size",
                                     "p_container", "p_retailprice", "p_comment"}),
        "", "p17"),
      S(Preparator::Join, R"pb({"other": "p17", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"p_partkey", "l_orderkey", "l_suppkey", "l_linenumber",
                                     "l_discount", "l_tax", "l_returnflag", "l_linestatus",
                                     "l_shipdate", "l_commitdate", "l_receiptdate",
                                     "l_shipinstruct", "l_shipmode", "l_comment"}),
        "", "l17"),
      S(Preparator::Group, R"pb({"by": ["l_partkey"], "aggs": {"avg_qty": {"col": "l_quantity", "fn": "mean"}}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "lim", "expr": "0.2 * avg_qty"})pb"),
      S(Preparator::Drop, drop_list({"avg_qty"}), "", "lim17"),
      S(Preparator::Join, R"pb({"other": "lim17", "on": ["l_partkey"]})pb", "l17"),
      S(Preparator::Query, R"pb({"expr": "l_quantity < lim"})pb"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"total": {"col": "l_extendedprice", "fn": "sum"}}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "avg_yearly", "expr": "total / 7.0"})pb"),
      S(Preparator::Drop, drop_list({"total"})),
  };
  return q;
}

TpchQuery q18() {
  TpchQuery q{"q18", {}, true, 100};
  q.plan = {
      S(Preparator::Group, R"pb({"by": ["l_orderkey"], "aggs": {"sum_qty": {"col": "l_quantity", "fn": "sum"}}})pb",
        "lineitem"),
      S(Preparator::Query, R"pb({"expr": "sum_qty > 300.0"})pb", "", "big18"),
      S(Preparator::Join, R"pb({"other": "big18", "left_on": ["o_orderkey"], "right_on": ["l_orderkey"]})pb",
        "orders"),
      S(Preparator::Join, R"pb({"other": "customer", "left_on": ["o_custkey"], "right_on": ["c_custkey"]})pb"),
      S(Preparator::Drop, drop_list({"o_custkey", "o_orderstatus", "o_orderpriority", "o_clerk",
                                     "o_shippriority", "o_comment", "l_orderkey", "c_address",
                                     "c_nationkey", "c_phone", "c_acctbal", "c_mktsegment",
                                     "c_comment"})),
      S(Preparator::Sort, R"pb({"by": ["o_totalprice", "o_orderdate"], "ascending": [false, true]})pb"),
  };
  return q;
}

TpchQuery q19() {
  TpchQuery q{"q19", {}, false, -1};
  q.plan = {
      S(Preparator::Query,
        R"pb({"expr": "(l_shipmode == \"AIR\" or l_shipmode == \"REG AIR\") and l_shipinstruct == \"DELIVER IN PERSON\""})pb",
        "lineitem"),
      S(Preparator::Drop, drop_list({"l_orderkey", "l_suppkey", "l_linenumber", "l_tax",
                                     "l_returnflag", "l_linestatus", "l_shipdate",
                                     "l_commitdate", "l_receiptdate", "l_shipinstruct",
                                     "l_shipmode", "l_comment"})),
      S(Preparator::Join, R"pb({"other": "part", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "(p_brand == \"Brand#12\" and p_container in (\"SM CASE\", \"SM BOX\", \"SM PACK\", \"SM PKG\") and l_quantity >= 1.0 and l_quantity <= 11.0 and p_size >= 1 and p_size <= 5) or (p_brand == \"Brand#23\" and p_container in (\"MED BAG\", \"MED BOX\", \"MED PKG\", \"MED PACK\") and l_quantity >= 10.0 and l_quantity <= 20.0 and p_size >= 1 and p_size <= 10) or (p_brand == \"Brand#34\" and p_container in (\"LG CASE\", \"LG BOX\", \"LG PACK\", \"LG PKG\") and l_quantity >= 20.0 and l_quantity <= 30.0 and p_size >= 1 and p_size <= 15)"})pb"),
      S(Preparator::CalcCol, R"pb({"column": "volume", "expr": "l_extendedprice * (1.0 - l_discount)"})pb"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"revenue": {"col": "volume", "fn": "sum"}}})pb"),
  };
  return q;
}

TpchQuery q20() {
  TpchQuery q{"q20", {}, true, -1};
  q.plan = {
      S(Preparator::Query, R"pb({"expr": "startswith(p_name, \"forest\")"})pb", "part"),
      S(Preparator::Drop, drop_list({"p_name", "p_mfgr", "p_brand", "p_type", "p_size",
                                     "p_container", "p_retailprice", "p_comment"}),
        "", "p20"),
      S(Preparator::Query,
        R"pb({"expr": "l_shipdate >= date(\"1994-01-01\") and l_shipdate < date(\"1995-01-01\")"})pb",
        "lineitem"),
      S(Preparator::Join, R"pb({"other": "p20", "left_on": ["l_partkey"], "right_on": ["p_partkey"]})pb"),
      S(Preparator::Group, R"pb({"by": ["l_partkey", "l_suppkey"], "aggs": {"qty": {"col": "l_quantity", "fn": "sum"}}})pb"),
      S(Preparator::CalcCol, R"pb({"column": "half", "expr": "0.5 * qty"})pb"),
      S(Preparator::Drop, drop_list({"qty"}), "", "sq20"),
      S(Preparator::Join, R"pb({"other": "sq20", "left_on": ["ps_partkey", "ps_suppkey"],
                              "right_on": ["l_partkey", "l_suppkey"]})pb",
        "partsupp"),
      S(Preparator::Query, R"pb({"expr": "ps_availqty > half"})pb"),
      S(Preparator::Drop, drop_list({"ps_partkey", "ps_availqty", "ps_supplycost", "ps_comment",
                                     "l_partkey", "l_suppkey", "half"})),
      S(Preparator::Dedup, R"pb({})pb", "", "s20"),
      S(Preparator::Join, R"pb({"other": "s20", "left_on": ["s_suppkey"], "right_on": ["ps_suppkey"]})pb",
        "supplier"),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "n_name == \"CANADA\""})pb"),
      S(Preparator::Drop, drop_list({"s_suppkey", "s_nationkey", "s_phone", "s_acctbal",
                                     "s_comment", "ps_suppkey", "n_nationkey", "n_name",
                                     "n_regionkey", "n_comment"})),
      S(Preparator::Sort, R"pb({"by": ["s_name"]})pb"),
  };
  return q;
}

TpchQuery q21() {
  TpchQuery q{"q21", {}, true, 100};
  q.plan = {
      S(Preparator::Group, R"pb({"by": ["l_orderkey"], "aggs": {"nsupp": {"col": "l_suppkey", "fn": "nunique"}}})pb",
        "lineitem", "po21"),
      S(Preparator::Query, R"pb({"expr": "l_receiptdate > l_commitdate"})pb", "lineitem"),
      S(Preparator::Drop, drop_list({"l_partkey", "l_linenumber", "l_quantity", "l_extendedprice",
                                     "l_discount", "l_tax", "l_returnflag", "l_linestatus",
                                     "l_shipdate", "l_commitdate", "l_receiptdate",
                                     "l_shipinstruct", "l_shipmode", "l_comment"}),
        "", "late21"),
      S(Preparator::Group, R"pb({"by": ["l_orderkey"], "aggs": {"nlate": {"col": "l_suppkey", "fn": "nunique"}}})pb",
        "late21", "lpo21"),
      S(Preparator::Join, R"pb({"other": "supplier", "left_on": ["l_suppkey"], "right_on": ["s_suppkey"]})pb",
        "late21"),
      S(Preparator::Join, R"pb({"other": "nation", "left_on": ["s_nationkey"], "right_on": ["n_nationkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "n_name == \"SAUDI ARABIA\""})pb"),
      S(Preparator::Drop, drop_list({"s_suppkey", "s_address", "s_nationkey", "s_phone",
                                     "s_acctbal", "s_comment", "n_nationkey", "n_name",
                                     "n_regionkey", "n_comment"})),
      S(Preparator::Join, R"pb({"other": "orders", "left_on": ["l_orderkey"], "right_on": ["o_orderkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "o_orderstatus == \"F\""})pb"),
      S(Preparator::Drop, drop_list({"o_orderkey", "o_custkey", "o_orderstatus", "o_totalprice",
                                     "o_orderdate", "o_orderpriority", "o_clerk",
                                     "o_shippriority", "o_comment"})),
      S(Preparator::Join, R"pb({"other": "po21", "on": ["l_orderkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "nsupp >= 2"})pb"),
      S(Preparator::Join, R"pb({"other": "lpo21", "on": ["l_orderkey"]})pb"),
      S(Preparator::Query, R"pb({"expr": "nlate == 1"})pb"),
      S(Preparator::Group, R"pb({"by": ["s_name"], "aggs": {"numwait": {"col": "l_orderkey", "fn": "count"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["numwait", "s_name"], "ascending": [false, true]})pb"),
  };
  return q;
}

TpchQuery q22() {
  TpchQuery q{"q22", {}, true, -1};
  q.plan = {
      S(Preparator::CalcCol, R"pb({"column": "cntrycode", "expr": "substr(c_phone, 1, 2)"})pb",
        "customer"),
      S(Preparator::Query,
        R"pb({"expr": "cntrycode in (\"13\", \"31\", \"23\", \"29\", \"30\", \"18\", \"17\")"})pb"),
      S(Preparator::Drop, drop_list({"c_name", "c_address", "c_nationkey", "c_phone",
                                     "c_mktsegment", "c_comment"}),
        "", "c22"),
      S(Preparator::Query, R"pb({"expr": "c_acctbal > 0.0"})pb"),
      S(Preparator::Group, R"pb({"by": [], "aggs": {"avg_bal": {"col": "c_acctbal", "fn": "mean"}}})pb",
        "", "avg22"),
      S(Preparator::Drop, drop_list({"o_orderkey", "o_orderstatus", "o_totalprice", "o_orderdate",
                                     "o_orderpriority", "o_clerk", "o_shippriority",
                                     "o_comment"}),
        "orders"),
      S(Preparator::Dedup, R"pb({})pb", "", "ho22"),
      S(Preparator::Join, R"pb({"other": "avg22", "how": "inner"})pb", "c22"),
      S(Preparator::Query, R"pb({"expr": "c_acctbal > avg_bal"})pb"),
      S(Preparator::Join, R"pb({"other": "ho22", "left_on": ["c_custkey"], "right_on": ["o_custkey"], "how": "left"})pb"),
      S(Preparator::Query, R"pb({"expr": "is_null(o_custkey)"})pb"),
      S(Preparator::Group, R"pb({"by": ["cntrycode"], "aggs": {"numcust": {"col": "c_custkey", "fn": "count"},
                                                             "totacctbal": {"col": "c_acctbal", "fn": "sum"}}})pb"),
      S(Preparator::Sort, R"pb({"by": ["cntrycode"]})pb"),
  };
  return q;
}

}  // namespace

const TpchQuery& query(const std::string& id, ScaleFactor sf) {
  static std::map<std::pair<std::string, double>, TpchQuery> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(id, sf.sf);
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  TpchQuery q;
  if (id == "q01") q = q01();
  else if (id == "q02") q = q02();
  else if (id == "q03") q = q03();
  else if (id == "q04") q = q04();
  else if (id == "q05") q = q05();
  else if (id == "q06") q = q06();
  else if (id == "q07") q = q07();
  else if (id == "q08") q = q08();
  else if (id == "q09") q = q09();
  else if (id == "q10") q = q10();
  else if (id == "q11") q = q11(sf);
  else if (id == "q12") q = q12();
  else if (id == "q13") q = q13();
  else if (id == "q14") q = q14();
  else if (id == "q15") q = q15();
  else if (id == "q16") q = q16();
  else if (id == "q17") q = q17();
  else if (id == "q18") q = q18();
  else if (id == "q19") q = q19();
  else if (id == "q20") q = q20();
  else if (id == "q21") q = q21();
  else if (id == "q22") q = q22();
  else throw InvalidArgument("unknown TPC-H query id '" + id + "'");
  return cache.emplace(key, std::move(q)).first->second;
}

}  // namespace prepbench::tpch
