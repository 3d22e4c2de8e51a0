#pragma once

// Condition expressions guarding constraints and stating data constraints.
//
//   expr       := or
//   or         := and ("or" and)*
//   and        := not ("and" not)*
//   not        := "not" not | atom
//   atom       := comparison | "(" expr ")"
//   comparison := operand (cmpop operand)?
//   operand    := "$" ident | "string" | [+-]integer | YYYY-MM-DD
//
// Evaluation is strong-Kleene over possibly partial environments: an unbound
// reference makes its comparison unknown, and unknown only propagates where
// the known operands cannot decide the result.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clause/value.hpp"

namespace clause {

enum class Tri { False, True, Unknown };

std::string_view tri_name(Tri t);

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view cmp_op_symbol(CmpOp op);

struct Ref {
  std::string name;
  bool operator==(const Ref&) const = default;
};

struct Literal {
  Value value;
  bool operator==(const Literal&) const = default;
};

using Operand = std::variant<Ref, Literal>;

struct CondNode;

// Immutable expression tree; copies share structure.
class CondExpr {
 public:
  explicit CondExpr(CondNode node);

  const CondNode& node() const { return *node_; }

  static CondExpr ref(std::string name);
  static CondExpr literal(Value value);
  static CondExpr compare(CmpOp op, Operand lhs, Operand rhs);
  static CondExpr negate(CondExpr operand);
  static CondExpr all_of(std::vector<CondExpr> terms);
  static CondExpr any_of(std::vector<CondExpr> terms);

  friend bool operator==(const CondExpr& a, const CondExpr& b);

 private:
  std::shared_ptr<const CondNode> node_;
};

struct OrNode {
  std::vector<CondExpr> terms;
  bool operator==(const OrNode&) const = default;
};

struct AndNode {
  std::vector<CondExpr> terms;
  bool operator==(const AndNode&) const = default;
};

struct NotNode {
  CondExpr operand;
  bool operator==(const NotNode&) const = default;
};

struct CompareNode {
  CmpOp op;
  Operand lhs;
  Operand rhs;
  bool operator==(const CompareNode&) const = default;
};

struct CondNode {
  std::variant<OrNode, AndNode, NotNode, CompareNode, Ref, Literal> v;
  bool operator==(const CondNode&) const = default;
};

using Env = std::map<std::string, Value>;

// Throws ParseError(position, message).
CondExpr parse_cond(std::string_view src);

// Canonical text form; parse_cond(print_cond(e)) == e for parsed e.
std::string print_cond(const CondExpr& e);

// Throws Error(KindMismatch) when a comparison mixes value kinds.
Tri eval_cond(const CondExpr& e, const Env& env);

std::set<std::string> free_refs(const CondExpr& e);

}  // namespace clause
