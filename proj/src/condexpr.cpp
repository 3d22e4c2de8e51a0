#include "clause/condexpr.hpp"

#include <charconv>
#include <stdexcept>

#include "clause/error.hpp"

namespace clause {

std::string_view tri_name(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view cmp_op_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "=";
}

CondExpr::CondExpr(CondNode node) : node_(std::make_shared<const CondNode>(std::move(node))) {}

CondExpr CondExpr::ref(std::string name) { return CondExpr(CondNode{Ref{std::move(name)}}); }
CondExpr CondExpr::literal(Value value) { return CondExpr(CondNode{Literal{std::move(value)}}); }

CondExpr CondExpr::compare(CmpOp op, Operand lhs, Operand rhs) {
  return CondExpr(CondNode{CompareNode{op, std::move(lhs), std::move(rhs)}});
}

CondExpr CondExpr::negate(CondExpr operand) { return CondExpr(CondNode{NotNode{std::move(operand)}}); }

CondExpr CondExpr::all_of(std::vector<CondExpr> terms) {
  if (terms.empty()) throw std::invalid_argument("all_of needs at least one term");
  if (terms.size() == 1) return terms.front();
  return CondExpr(CondNode{AndNode{std::move(terms)}});
}

CondExpr CondExpr::any_of(std::vector<CondExpr> terms) {
  if (terms.empty()) throw std::invalid_argument("any_of needs at least one term");
  if (terms.size() == 1) return terms.front();
  return CondExpr(CondNode{OrNode{std::move(terms)}});
}

bool operator==(const CondExpr& a, const CondExpr& b) {
  return a.node_ == b.node_ || *a.node_ == *b.node_;
}

// --- lexer / parser ----------------------------------------------------------

namespace {

enum class Tok { End, LParen, RParen, RefTok, LiteralTok, Cmp, And, Or, Not };

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::string text;
  Value value;
  CmpOp op = CmpOp::Eq;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
    Token t;
    t.pos = pos_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (c == '(') { ++pos_; t.kind = Tok::LParen; return t; }
    if (c == ')') { ++pos_; t.kind = Tok::RParen; return t; }
    if (c == '$') {
      std::size_t n = identifier_length(src_.substr(pos_ + 1));
      if (n == 0) throw ParseError(pos_, "expected identifier after '$'");
      t.kind = Tok::RefTok;
      t.text = std::string(src_.substr(pos_ + 1, n));
      pos_ += n + 1;
      return t;
    }
    if (c == '"') return lex_string(t);
    if (is_digit(c) || ((c == '-' || c == '+') && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1])))
      return lex_number(t);
    if (c == '=' || c == '!' || c == '<' || c == '>') return lex_cmp(t);
    std::size_t n = identifier_length(src_.substr(pos_));
    if (n > 0) {
      std::string_view word = src_.substr(pos_, n);
      if (word == "and") t.kind = Tok::And;
      else if (word == "or") t.kind = Tok::Or;
      else if (word == "not") t.kind = Tok::Not;
      else throw ParseError(pos_, "unexpected word '" + std::string(word) + "'");
      pos_ += n;
      return t;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

 private:
  Token lex_string(Token& t) {
    std::string out;
    std::size_t i = pos_ + 1;
    for (;;) {
      if (i >= src_.size()) throw ParseError(pos_, "unterminated string literal");
      char c = src_[i];
      if (c == '"') break;
      if (c == '\\') {
        if (i + 1 >= src_.size()) throw ParseError(pos_, "unterminated string literal");
        char e = src_[i + 1];
        if (e != '"' && e != '\\') throw ParseError(i, "unknown escape sequence");
        out += e;
        i += 2;
        continue;
      }
      out += c;
      ++i;
    }
    pos_ = i + 1;
    t.kind = Tok::LiteralTok;
    t.value = std::move(out);
    return t;
  }

  Token lex_number(Token& t) {
    std::size_t start = pos_;
    std::size_t i = pos_;
    bool sign = src_[i] == '-' || src_[i] == '+';
    if (sign) ++i;
    std::size_t digits_start = i;
    while (i < src_.size() && is_digit(src_[i])) ++i;
    if (!sign && i - digits_start == 4 && i < src_.size() && src_[i] == '-') {
      std::string_view candidate = src_.substr(start, 10);
      auto d = Date::parse_iso(candidate);
      if (!d) throw ParseError(start, "malformed date literal");
      pos_ = start + 10;
      t.kind = Tok::LiteralTok;
      t.value = *d;
      return t;
    }
    std::string_view digits = src_.substr(digits_start, i - digits_start);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc{}) throw ParseError(start, "integer literal out of range");
    if (src_[start] == '-') v = -v;
    if (i < src_.size() && identifier_length(src_.substr(i)) > 0)
      throw ParseError(i, "unexpected character after number");
    pos_ = i;
    t.kind = Tok::LiteralTok;
    t.value = v;
    return t;
  }

  Token lex_cmp(Token& t) {
    char c = src_[pos_];
    bool eq_next = pos_ + 1 < src_.size() && src_[pos_ + 1] == '=';
    t.kind = Tok::Cmp;
    switch (c) {
      case '=': t.op = CmpOp::Eq; pos_ += 1; break;
      case '!':
        if (!eq_next) throw ParseError(pos_, "expected '!='");
        t.op = CmpOp::Ne; pos_ += 2; break;
      case '<': t.op = eq_next ? CmpOp::Le : CmpOp::Lt; pos_ += eq_next ? 2 : 1; break;
      default: t.op = eq_next ? CmpOp::Ge : CmpOp::Gt; pos_ += eq_next ? 2 : 1; break;
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { advance(); }

  CondExpr parse() {
    CondExpr e = parse_or();
    if (cur_.kind != Tok::End) throw ParseError(cur_.pos, "unexpected trailing input");
    return e;
  }

 private:
  void advance() { cur_ = lex_.next(); }

  CondExpr parse_or() {
    std::vector<CondExpr> terms{parse_and()};
    while (cur_.kind == Tok::Or) {
      advance();
      terms.push_back(parse_and());
    }
    return CondExpr::any_of(std::move(terms));
  }

  CondExpr parse_and() {
    std::vector<CondExpr> terms{parse_not()};
    while (cur_.kind == Tok::And) {
      advance();
      terms.push_back(parse_not());
    }
    return CondExpr::all_of(std::move(terms));
  }

  CondExpr parse_not() {
    if (cur_.kind == Tok::Not) {
      advance();
      return CondExpr::negate(parse_not());
    }
    return parse_atom();
  }

  CondExpr parse_atom() {
    if (cur_.kind == Tok::LParen) {
      advance();
      CondExpr inner = parse_or();
      if (cur_.kind != Tok::RParen) throw ParseError(cur_.pos, "expected ')'");
      advance();
      return inner;
    }
    Operand lhs = parse_operand();
    if (cur_.kind != Tok::Cmp) {
      if (const auto* r = std::get_if<Ref>(&lhs)) return CondExpr::ref(r->name);
      return CondExpr::literal(std::get<Literal>(lhs).value);
    }
    CmpOp op = cur_.op;
    advance();
    Operand rhs = parse_operand();
    return CondExpr::compare(op, std::move(lhs), std::move(rhs));
  }

  Operand parse_operand() {
    if (cur_.kind == Tok::RefTok) {
      Operand o = Ref{cur_.text};
      advance();
      return o;
    }
    if (cur_.kind == Tok::LiteralTok) {
      Operand o = Literal{cur_.value};
      advance();
      return o;
    }
    if (cur_.kind == Tok::End) throw ParseError(cur_.pos, "unexpected end of input");
    throw ParseError(cur_.pos, "expected operand");
  }

  Lexer lex_;
  Token cur_;
};

// --- printer -----------------------------------------------------------------

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string print_value(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return quote(*s);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<Date>(v).iso();
}

std::string print_operand(const Operand& o) {
  if (const auto* r = std::get_if<Ref>(&o)) return "$" + r->name;
  return print_value(std::get<Literal>(o).value);
}

bool is_junction(const CondExpr& e) {
  const auto& v = e.node().v;
  return std::holds_alternative<OrNode>(v) || std::holds_alternative<AndNode>(v);
}

std::string print_node(const CondExpr& e);

std::string print_terms(const std::vector<CondExpr>& terms, std::string_view sep, bool inside_or) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += sep;
    const auto& v = terms[i].node().v;
    bool wrap = std::holds_alternative<OrNode>(v) || (!inside_or && std::holds_alternative<AndNode>(v));
    if (wrap) out += "(" + print_node(terms[i]) + ")";
    else out += print_node(terms[i]);
  }
  return out;
}

std::string print_node(const CondExpr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, OrNode>) {
          return print_terms(n.terms, " or ", true);
        } else if constexpr (std::is_same_v<N, AndNode>) {
          return print_terms(n.terms, " and ", false);
        } else if constexpr (std::is_same_v<N, NotNode>) {
          if (is_junction(n.operand)) return "not (" + print_node(n.operand) + ")";
          return "not " + print_node(n.operand);
        } else if constexpr (std::is_same_v<N, CompareNode>) {
          return print_operand(n.lhs) + " " + std::string(cmp_op_symbol(n.op)) + " " +
                 print_operand(n.rhs);
        } else if constexpr (std::is_same_v<N, Ref>) {
          return "$" + n.name;
        } else {
          return print_value(n.value);
        }
      },
      e.node().v);
}

// --- evaluation --------------------------------------------------------------

const Value* resolve(const Operand& o, const Env& env) {
  if (const auto* l = std::get_if<Literal>(&o)) return &l->value;
  auto it = env.find(std::get<Ref>(o).name);
  return it == env.end() ? nullptr : &it->second;
}

bool truthy(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return !s->empty();
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i != 0;
  return true;
}

Tri from_bool(bool b) { return b ? Tri::True : Tri::False; }

template <typename T>
bool apply(CmpOp op, const T& a, const T& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return b <= a;
  }
  return false;
}

Tri eval_compare(const CompareNode& n, const Env& env) {
  const Value* a = resolve(n.lhs, env);
  const Value* b = resolve(n.rhs, env);
  if (!a || !b) return Tri::Unknown;
  if (a->index() != b->index()) {
    throw Error(ErrorCode::KindMismatch,
                "cannot compare " + std::string(kind_name(kind_of(*a))) + " with " +
                    std::string(kind_name(kind_of(*b))) + " in '" + print_operand(n.lhs) + " " +
                    std::string(cmp_op_symbol(n.op)) + " " + print_operand(n.rhs) + "'");
  }
  return std::visit(
      [&](const auto& x) -> Tri {
        using T = std::decay_t<decltype(x)>;
        return from_bool(apply(n.op, x, std::get<T>(*b)));
      },
      *a);
}

Tri eval_node(const CondExpr& e, const Env& env) {
  return std::visit(
      [&](const auto& n) -> Tri {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, OrNode> || std::is_same_v<N, AndNode>) {
          constexpr bool is_or = std::is_same_v<N, OrNode>;
          bool saw_unknown = false;
          bool decided = false;
          for (const auto& t : n.terms) {
            Tri r = eval_node(t, env);
            if (r == Tri::Unknown) saw_unknown = true;
            else if ((r == Tri::True) == is_or) decided = true;
          }
          if (decided) return is_or ? Tri::True : Tri::False;
          if (saw_unknown) return Tri::Unknown;
          return is_or ? Tri::False : Tri::True;
        } else if constexpr (std::is_same_v<N, NotNode>) {
          Tri r = eval_node(n.operand, env);
          if (r == Tri::Unknown) return r;
          return r == Tri::True ? Tri::False : Tri::True;
        } else if constexpr (std::is_same_v<N, CompareNode>) {
          return eval_compare(n, env);
        } else if constexpr (std::is_same_v<N, Ref>) {
          auto it = env.find(n.name);
          if (it == env.end()) return Tri::Unknown;
          return from_bool(truthy(it->second));
        } else {
          return from_bool(truthy(n.value));
        }
      },
      e.node().v);
}

void collect_refs(const CondExpr& e, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, OrNode> || std::is_same_v<N, AndNode>) {
          for (const auto& t : n.terms) collect_refs(t, out);
        } else if constexpr (std::is_same_v<N, NotNode>) {
          collect_refs(n.operand, out);
        } else if constexpr (std::is_same_v<N, CompareNode>) {
          if (const auto* r = std::get_if<Ref>(&n.lhs)) out.insert(r->name);
          if (const auto* r = std::get_if<Ref>(&n.rhs)) out.insert(r->name);
        } else if constexpr (std::is_same_v<N, Ref>) {
          out.insert(n.name);
        }
      },
      e.node().v);
}

}  // namespace

CondExpr parse_cond(std::string_view src) { return Parser(src).parse(); }

std::string print_cond(const CondExpr& e) { return print_node(e); }

Tri eval_cond(const CondExpr& e, const Env& env) { return eval_node(e, env); }

std::set<std::string> free_refs(const CondExpr& e) {
  std::set<std::string> out;
  collect_refs(e, out);
  return out;
}

}  // namespace clause
