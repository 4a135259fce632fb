#include "prepbench/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <regex>

#include "prepbench/errors.hpp"

namespace prepbench::expr {

namespace {

struct Token {
  enum Kind { Ident, Number, String, Op, End } kind;
  std::string text;
  Value number;  // for Number tokens
  std::size_t pos;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }
  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.pos = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Token::End, "", {}, pos_};
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_ = {Token::Ident, src_.substr(start, pos_ - start), {}, start};
    } else if (c == '`') {
      std::size_t start = ++pos_;
      while (pos_ < src_.size() && src_[pos_] != '`') ++pos_;
      if (pos_ >= src_.size()) throw ParseError("unterminated ` identifier");
      tok_ = {Token::Ident, src_.substr(start, pos_ - start), {}, start};
      ++pos_;
    } else if (c == '"' || c == '\'') {
      lex_string(c);
    } else {
      lex_op();
    }
  }

  void lex_number() {
    std::size_t start = pos_;
    bool is_float = false;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-') &&
            (c == 'e' || c == 'E'))
          ++pos_;
      } else {
        break;
      }
    }
    const std::string text = src_.substr(start, pos_ - start);
    if (is_float) {
      double d;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
      if (ec != std::errc()) throw ParseError("bad number '" + text + "'");
      tok_ = {Token::Number, text, d, start};
    } else {
      std::int64_t i;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
      if (ec != std::errc()) throw ParseError("bad number '" + text + "'");
      tok_ = {Token::Number, text, i, start};
    }
  }

  void lex_string(char quote) {
    std::size_t start = pos_++;
    std::string out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\' && pos_ + 1 < src_.size()) {
        const char n = src_[pos_ + 1];
        out += (n == 'n' ? '\n' : n == 't' ? '\t' : n);
        pos_ += 2;
      } else if (c == quote) {
        ++pos_;
        tok_ = {Token::String, out, {}, start};
        return;
      } else {
        out += c;
        ++pos_;
      }
    }
    throw ParseError("unterminated string literal");
  }

  void lex_op() {
    static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
    for (const char* op : two) {
      if (src_.compare(pos_, 2, op) == 0) {
        tok_ = {Token::Op, op, {}, pos_};
        pos_ += 2;
        return;
      }
    }
    const char c = src_[pos_];
    if (std::string("()+-*/<>!,").find(c) == std::string::npos)
      throw ParseError("unexpected character '" + std::string(1, c) + "' at " +
                       std::to_string(pos_));
    tok_ = {Token::Op, std::string(1, c), {}, pos_};
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

ExprPtr make_node(NodeKind k) {
  auto n = std::make_unique<Node>();
  n->kind = k;
  return n;
}

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) {}

  ExprPtr parse_expression() {
    auto e = parse_or();
    if (lex_.peek().kind != Token::End)
      throw ParseError("trailing input at position " + std::to_string(lex_.peek().pos));
    return e;
  }

private:
  bool accept_op(const std::string& op) {
    if (lex_.peek().kind == Token::Op && lex_.peek().text == op) {
      lex_.take();
      return true;
    }
    return false;
  }

  bool accept_kw(const std::string& kw) {
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == kw) {
      lex_.take();
      return true;
    }
    return false;
  }

  void expect_op(const std::string& op) {
    if (!accept_op(op))
      throw ParseError("expected '" + op + "' at position " + std::to_string(lex_.peek().pos));
  }

  ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
    auto n = make_node(NodeKind::Binary);
    n->name = std::move(op);
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    return n;
  }

  ExprPtr parse_or() {
    auto lhs = parse_and();
    while (accept_kw("or") || accept_op("||")) lhs = binary("or", std::move(lhs), parse_and());
    return lhs;
  }

  ExprPtr parse_and() {
    auto lhs = parse_not();
    while (accept_kw("and") || accept_op("&&")) lhs = binary("and", std::move(lhs), parse_not());
    return lhs;
  }

  ExprPtr parse_not() {
    if (accept_kw("not") || accept_op("!")) {
      auto n = make_node(NodeKind::Unary);
      n->name = "not";
      n->children.push_back(parse_not());
      return n;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    auto lhs = parse_additive();
    if (lex_.peek().kind == Token::Op) {
      const std::string op = lex_.peek().text;
      if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") {
        lex_.take();
        return binary(op, std::move(lhs), parse_additive());
      }
    }
    if (lex_.peek().kind == Token::Ident && lex_.peek().text == "in") {
      lex_.take();
      auto n = make_node(NodeKind::In);
      n->children.push_back(std::move(lhs));
      expect_op("(");
      do {
        n->children.push_back(parse_or());
      } while (accept_op(","));
      expect_op(")");
      return n;
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      const std::string op = lex_.take().text;
      lhs = binary(op, std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    auto lhs = parse_unary();
    while (lex_.peek().kind == Token::Op &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      const std::string op = lex_.take().text;
      lhs = binary(op, std::move(lhs), parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (accept_op("-")) {
      auto n = make_node(NodeKind::Unary);
      n->name = "-";
      n->children.push_back(parse_unary());
      return n;
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    const Token t = lex_.take();
    switch (t.kind) {
      case Token::Number: {
        auto n = make_node(NodeKind::Literal);
        n->literal = t.number;
        return n;
      }
      case Token::String: {
        auto n = make_node(NodeKind::Literal);
        n->literal = t.text;
        return n;
      }
      case Token::Ident: {
        if (t.text == "true" || t.text == "false") {
          auto n = make_node(NodeKind::Literal);
          n->literal = (t.text == "true");
          return n;
        }
        if (t.text == "null") return make_node(NodeKind::Literal);
        if (lex_.peek().kind == Token::Op && lex_.peek().text == "(") {
          lex_.take();
          auto n = make_node(NodeKind::Call);
          n->name = t.text;
          if (!(lex_.peek().kind == Token::Op && lex_.peek().text == ")")) {
            do {
              n->children.push_back(parse_or());
            } while (accept_op(","));
          }
          expect_op(")");
          return n;
        }
        auto n = make_node(NodeKind::Column);
        n->name = t.text;
        return n;
      }
      case Token::Op:
        if (t.text == "(") {
          auto e = parse_or();
          expect_op(")");
          return e;
        }
        throw ParseError("unexpected '" + t.text + "' at position " + std::to_string(t.pos));
      case Token::End: throw ParseError("unexpected end of expression");
    }
    throw ParseError("unreachable");
  }

  Lexer lex_;
};

void collect_columns(const Node& node, std::vector<std::string>& out) {
  if (node.kind == NodeKind::Column) {
    for (const auto& s : out)
      if (s == node.name) return;
    out.push_back(node.name);
    return;
  }
  for (const auto& c : node.children) collect_columns(*c, out);
}

void bind_columns(Node& node, const std::vector<ColumnSpec>& schema) {
  if (node.kind == NodeKind::Column) {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].name == node.name) {
        node.column_index = static_cast<int>(i);
        return;
      }
    }
    throw ColumnNotFound(node.name);
  }
  for (auto& c : node.children) bind_columns(*c, schema);
}

const std::string& require_string(const Value& v, const char* what) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw TypeMismatch(std::string(what) + " expects a string argument");
}

Value eval_node(const Node& node, const std::vector<Value>& row);

Value eval_call(const Node& node, const std::vector<Value>& row) {
  const auto arg = [&](std::size_t i) { return eval_node(*node.children[i], row); };
  const auto argc = node.children.size();
  const auto need = [&](std::size_t n) {
    if (argc != n)
      throw InvalidArgument(node.name + "() expects " + std::to_string(n) + " arguments");
  };
  const std::string& fn = node.name;

  if (fn == "if") {
    need(3);
    const Value c = arg(0);
    if (is_null(c)) return Value{};
    if (!std::holds_alternative<bool>(c)) throw TypeMismatch("if() condition must be boolean");
    return std::get<bool>(c) ? arg(1) : arg(2);
  }
  if (fn == "is_null") {
    need(1);
    return is_null(arg(0));
  }
  if (fn == "date") {
    need(1);
    const Value v = arg(0);
    if (is_null(v)) return Value{};
    auto dt = parse_iso_date(require_string(v, "date"));
    if (!dt) throw InvalidArgument("date() expects YYYY-MM-DD");
    return *dt;
  }

  // Remaining functions propagate null from their first argument.
  const Value v0 = argc > 0 ? arg(0) : Value{};
  if (argc > 0 && is_null(v0)) return Value{};

  if (fn == "contains" || fn == "startswith" || fn == "endswith") {
    need(2);
    const Value v1 = arg(1);
    if (is_null(v1)) return Value{};
    const std::string& s = require_string(v0, fn.c_str());
    const std::string& sub = require_string(v1, fn.c_str());
    if (fn == "contains") return s.find(sub) != std::string::npos;
    if (fn == "startswith") return s.rfind(sub, 0) == 0;
    return s.size() >= sub.size() && s.compare(s.size() - sub.size(), sub.size(), sub) == 0;
  }
  if (fn == "matches") {
    need(2);
    const Value v1 = arg(1);
    if (is_null(v1)) return Value{};
    return std::regex_search(require_string(v0, "matches"),
                             std::regex(require_string(v1, "matches")));
  }
  if (fn == "lower" || fn == "upper") {
    need(1);
    std::string s = require_string(v0, fn.c_str());
    for (auto& ch : s)
      ch = fn == "lower" ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch)))
                         : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
  }
  if (fn == "substr") {
    if (argc != 2 && argc != 3) throw InvalidArgument("substr() expects 2 or 3 arguments");
    const std::string& s = require_string(v0, "substr");
    const auto start_v = arg(1);
    if (is_null(start_v)) return Value{};
    const std::int64_t start = std::get<std::int64_t>(start_v);  // 1-based
    if (start < 1) throw InvalidArgument("substr() start is 1-based");
    const std::size_t from = static_cast<std::size_t>(start - 1);
    if (from >= s.size()) return std::string();
    std::size_t len = std::string::npos;
    if (argc == 3) {
      const auto len_v = arg(2);
      if (is_null(len_v)) return Value{};
      len = static_cast<std::size_t>(std::get<std::int64_t>(len_v));
    }
    return s.substr(from, len);
  }
  if (fn == "strlen") {
    need(1);
    return static_cast<std::int64_t>(require_string(v0, "strlen").size());
  }
  if (fn == "abs") {
    need(1);
    if (std::holds_alternative<std::int64_t>(v0)) return std::abs(std::get<std::int64_t>(v0));
    return std::abs(as_double(v0));
  }
  if (fn == "year" || fn == "month" || fn == "day") {
    need(1);
    if (!std::holds_alternative<Datetime>(v0)) throw TypeMismatch(fn + "() expects a datetime");
    std::int64_t days = std::get<Datetime>(v0).millis / 86400000;
    if (std::get<Datetime>(v0).millis % 86400000 < 0) days -= 1;
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    if (fn == "year") return static_cast<std::int64_t>(y);
    if (fn == "month") return static_cast<std::int64_t>(m);
    return static_cast<std::int64_t>(d);
  }
  throw InvalidArgument("unknown function " + fn + "()");
}

Value eval_binary(const Node& node, const std::vector<Value>& row) {
  const std::string& op = node.name;
  const Value a = eval_node(*node.children[0], row);
  if (op == "and") {
    if (is_null(a)) return Value{};
    if (!std::get<bool>(a)) return false;
    const Value b = eval_node(*node.children[1], row);
    if (is_null(b)) return Value{};
    return std::get<bool>(b);
  }
  if (op == "or") {
    if (!is_null(a) && std::get<bool>(a)) return true;
    const Value b = eval_node(*node.children[1], row);
    if (is_null(a) || is_null(b)) return Value{};
    return std::get<bool>(b);
  }
  const Value b = eval_node(*node.children[1], row);
  if (is_null(a) || is_null(b)) return Value{};

  if (op == "==" || op == "!=") {
    bool eq;
    const bool a_num = a.index() == 1 || a.index() == 2;
    const bool b_num = b.index() == 1 || b.index() == 2;
    if (a_num && b_num) {
      eq = as_double(a) == as_double(b);
    } else if (a.index() != b.index()) {
      throw TypeMismatch("cannot compare " + std::string(to_string(type_of(a))) + " with " +
                         to_string(type_of(b)));
    } else {
      eq = values_equal(a, b);
    }
    return op == "==" ? eq : !eq;
  }
  if (op == "<" || op == "<=" || op == ">" || op == ">=") {
    const bool a_num = a.index() == 1 || a.index() == 2;
    const bool b_num = b.index() == 1 || b.index() == 2;
    if (!((a_num && b_num) || a.index() == b.index()))
      throw TypeMismatch("cannot order " + std::string(to_string(type_of(a))) + " against " +
                         to_string(type_of(b)));
    if (!a_num && a.index() == 3)
      throw TypeMismatch("booleans are not ordered");
    const int c = compare_values(a, b);
    if (op == "<") return c < 0;
    if (op == "<=") return c <= 0;
    if (op == ">") return c > 0;
    return c >= 0;
  }

  // Arithmetic.
  if (std::holds_alternative<Datetime>(a) || std::holds_alternative<Datetime>(b))
    throw TypeMismatch("datetime arithmetic is not supported; use year()/month()/day()");
  if (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b)) {
    if (op == "+" && a.index() == 4 && b.index() == 4)
      return std::get<std::string>(a) + std::get<std::string>(b);
    throw TypeMismatch("string operands for '" + op + "'");
  }
  const bool both_int =
      std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b);
  if (both_int && op != "/") {
    const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
    if (op == "+") return x + y;
    if (op == "-") return x - y;
    if (op == "*") return x * y;
  }
  const double x = as_double(a), y = as_double(b);
  if (op == "+") return x + y;
  if (op == "-") return x - y;
  if (op == "*") return x * y;
  if (op == "/") {
    if (y == 0.0) return Value{};
    return x / y;
  }
  throw InvalidArgument("unknown operator " + op);
}

Value eval_node(const Node& node, const std::vector<Value>& row) {
  switch (node.kind) {
    case NodeKind::Literal: return node.literal;
    case NodeKind::Column: {
      if (node.column_index < 0) throw ColumnNotFound(node.name);
      return row[static_cast<std::size_t>(node.column_index)];
    }
    case NodeKind::Unary: {
      const Value v = eval_node(*node.children[0], row);
      if (is_null(v)) return Value{};
      if (node.name == "not") {
        if (!std::holds_alternative<bool>(v)) throw TypeMismatch("'not' expects a boolean");
        return !std::get<bool>(v);
      }
      if (std::holds_alternative<std::int64_t>(v)) return -std::get<std::int64_t>(v);
      return -as_double(v);
    }
    case NodeKind::Binary: return eval_binary(node, row);
    case NodeKind::In: {
      const Value v = eval_node(*node.children[0], row);
      if (is_null(v)) return Value{};
      for (std::size_t i = 1; i < node.children.size(); ++i) {
        const Value item = eval_node(*node.children[i], row);
        if (is_null(item)) continue;
        const bool v_num = v.index() == 1 || v.index() == 2;
        const bool i_num = item.index() == 1 || item.index() == 2;
        if (v_num && i_num ? as_double(v) == as_double(item) : values_equal(v, item)) return true;
      }
      return false;
    }
    case NodeKind::Call: return eval_call(node, row);
  }
  throw InvalidArgument("unreachable");
}

std::optional<DataType> static_type_of(const Node& node, const std::vector<ColumnSpec>& schema) {
  switch (node.kind) {
    case NodeKind::Literal:
      if (is_null(node.literal)) return std::nullopt;
      return type_of(node.literal);
    case NodeKind::Column:
      if (node.column_index < 0) return std::nullopt;
      return schema[static_cast<std::size_t>(node.column_index)].type;
    case NodeKind::Unary: {
      if (node.name == "not") return DataType::Bool;
      return static_type_of(*node.children[0], schema);
    }
    case NodeKind::Binary: {
      const std::string& op = node.name;
      if (op == "and" || op == "or" || op == "==" || op == "!=" || op == "<" || op == "<=" ||
          op == ">" || op == ">=")
        return DataType::Bool;
      const auto lt = static_type_of(*node.children[0], schema);
      const auto rt = static_type_of(*node.children[1], schema);
      if (op == "/") return DataType::Float;
      if (lt == DataType::String || rt == DataType::String) return DataType::String;
      if (lt == DataType::Int && rt == DataType::Int) return DataType::Int;
      if (lt && rt) return DataType::Float;
      return std::nullopt;
    }
    case NodeKind::In: return DataType::Bool;
    case NodeKind::Call: {
      const std::string& fn = node.name;
      if (fn == "contains" || fn == "startswith" || fn == "endswith" || fn == "matches" ||
          fn == "is_null")
        return DataType::Bool;
      if (fn == "lower" || fn == "upper" || fn == "substr") return DataType::String;
      if (fn == "strlen" || fn == "year" || fn == "month" || fn == "day") return DataType::Int;
      if (fn == "date") return DataType::Datetime;
      if (fn == "if") {
        const auto a = static_type_of(*node.children[1], schema);
        const auto b = static_type_of(*node.children[2], schema);
        if (a && b && *a == *b) return a;
        if ((a == DataType::Int && b == DataType::Float) ||
            (a == DataType::Float && b == DataType::Int))
          return DataType::Float;
        return std::nullopt;
      }
      if (fn == "abs") return static_type_of(*node.children[0], schema);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(text).parse_expression(); }

std::vector<std::string> referenced_columns(const Node& node) {
  std::vector<std::string> out;
  collect_columns(node, out);
  return out;
}

Compiled::Compiled(const std::string& text, const std::vector<ColumnSpec>& schema)
    : text_(text), root_(parse(text)), schema_(schema) {
  bind_columns(*root_, schema_);
}

Value Compiled::eval(const std::vector<Value>& row) const { return eval_node(*root_, row); }

bool Compiled::matches(const std::vector<Value>& row) const {
  const Value v = eval(row);
  return !is_null(v) && std::holds_alternative<bool>(v) && std::get<bool>(v);
}

std::optional<DataType> Compiled::static_type() const { return static_type_of(*root_, schema_); }

}  // namespace prepbench::expr
