#pragma once

#include <memory>
#include <string>
#include <vector>

#include "prepbench/table.hpp"

namespace prepbench {

/// Engine-neutral expression grammar for pipeline predicates and computed
/// columns. Pipelines carry expressions as text; each engine compiles them
/// against its own schema.
///
///   literal   := 123 | 1.5 | "text" | 'text' | true | false | null
///   column    := ident | `quoted ident`
///   call      := ident '(' expr, ... ')'
///   operators := or, and, not, == != < <= > >=, in (...), + - * /, unary -
///
/// Functions: contains, startswith, endswith, matches (regex), lower, upper,
/// substr (1-based), strlen, if, is_null, year, month, day, date, abs.
///
/// Null semantics: any operand null makes the result null except for
/// is_null and if; filters keep a row only when the predicate is exactly true.
namespace expr {

enum class NodeKind {
  Literal,
  Column,
  Unary,   // op: "-" | "not"
  Binary,  // op: arithmetic / comparison / "and" / "or"
  In,      // value in literal list
  Call,
};

struct Node {
  NodeKind kind;
  Value literal;                                // Literal
  std::string name;                             // Column name / Call function / operator
  std::vector<std::unique_ptr<Node>> children;  // operands / call args / in-list
  int column_index = -1;                        // bound by compile()
};

using ExprPtr = std::unique_ptr<Node>;

/// Parses the grammar above; throws ParseError with position info.
ExprPtr parse(const std::string& text);

/// Column names referenced by the expression (deduplicated, in first-use order).
std::vector<std::string> referenced_columns(const Node& node);

/// Binds column references to schema indices; throws ColumnNotFound.
class Compiled {
public:
  Compiled() = default;
  Compiled(const std::string& text, const std::vector<ColumnSpec>& schema);

  /// Evaluates against one row. Throws TypeMismatch on ill-typed operations.
  Value eval(const std::vector<Value>& row) const;

  /// True only when eval() yields boolean true (null and non-true drop rows).
  bool matches(const std::vector<Value>& row) const;

  /// Result type when it can be decided statically, with int promoted to
  /// float for mixed arithmetic; nullopt when data-dependent.
  std::optional<DataType> static_type() const;

  const std::string& text() const { return text_; }

private:
  std::string text_;
  ExprPtr root_;
  std::vector<ColumnSpec> schema_;
};

}  // namespace expr
}  // namespace prepbench
