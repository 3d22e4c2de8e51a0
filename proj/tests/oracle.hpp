#pragma once

// Random generics and a brute-force reading of the constraint semantics,
// written without the engine's closure or evaluator.

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clause/document.hpp"

namespace oracle {

using clause::UnitPath;

// Conditions over $x (integer) and $y (string), evaluated here directly.
struct Cond {
  enum Kind { XCmp, YEq, YNe, And, Or, Not } kind = XCmp;
  int op = 0;  // XCmp: 0 = 1 != 2 < 3 <= 4 > 5 >=
  std::int64_t k = 0;
  std::string s;
  std::vector<Cond> kids;

  bool eval(std::int64_t x, const std::string& y) const {
    switch (kind) {
      case XCmp:
        switch (op) {
          case 0: return x == k;
          case 1: return x != k;
          case 2: return x < k;
          case 3: return x <= k;
          case 4: return x > k;
          default: return x >= k;
        }
      case YEq: return y == s;
      case YNe: return y != s;
      case And: return kids[0].eval(x, y) && kids[1].eval(x, y);
      case Or: return kids[0].eval(x, y) || kids[1].eval(x, y);
      case Not: return !kids[0].eval(x, y);
    }
    return false;
  }

  std::string text() const {
    static const char* ops[] = {"=", "!=", "<", "<=", ">", ">="};
    switch (kind) {
      case XCmp: return "$x " + std::string(ops[op]) + " " + std::to_string(k);
      case YEq: return "$y = \"" + s + "\"";
      case YNe: return "$y != \"" + s + "\"";
      case And: return "(" + kids[0].text() + ") and (" + kids[1].text() + ")";
      case Or: return "(" + kids[0].text() + ") or (" + kids[1].text() + ")";
      case Not: return "not (" + kids[0].text() + ")";
    }
    return "";
  }
};

inline Cond random_cond(std::mt19937& rng, int depth = 2) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 2);
  Cond c;
  static const char* ys[] = {"a", "b", "c"};
  switch (pick(rng)) {
    case 0:
    case 3:
      c.kind = Cond::XCmp;
      c.op = std::uniform_int_distribution<int>(0, 5)(rng);
      c.k = std::uniform_int_distribution<int>(0, 4)(rng);
      return c;
    case 1:
      c.kind = Cond::YEq;
      c.s = ys[std::uniform_int_distribution<int>(0, 2)(rng)];
      return c;
    case 2:
      c.kind = Cond::YNe;
      c.s = ys[std::uniform_int_distribution<int>(0, 2)(rng)];
      return c;
    case 4:
      c.kind = std::bernoulli_distribution(0.5)(rng) ? Cond::And : Cond::Or;
      c.kids = {random_cond(rng, depth - 1), random_cond(rng, depth - 1)};
      return c;
    default:
      c.kind = Cond::Not;
      c.kids = {random_cond(rng, depth - 1)};
      return c;
  }
}

struct Node {
  UnitPath path;
  bool compulsory = true;
  bool atomic = true;
};

enum class CKind { ForcesUnit, ForcesCond, Incompatible, ExclusiveOr, Refers, Data };

struct Rule {
  CKind kind;
  UnitPath a, b;
  bool guarded = false;
  Cond guard;
  Cond cond;  // ForcesCond antecedent, Data expression
};

struct Case {
  clause::GenericDocument generic;
  std::vector<Node> nodes;  // pre-order
  std::vector<UnitPath> atomics;
  std::vector<Rule> rules;  // same order as generic.constraints
  std::int64_t x = 0;
  std::string y;
};

inline Case random_case(std::mt19937& rng, int max_atomic = 10, int max_constraints = 12) {
  Case c;
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int budget = uni(std::max(1, max_atomic - 4), max_atomic);
  int counter = 0;

  std::function<clause::UnitTemplate(const UnitPath&, int)> make = [&](const UnitPath& parent, int depth) {
    clause::UnitTemplate u;
    u.label = "U" + std::to_string(++counter);
    u.inclusion = coin(0.5) ? clause::Inclusion::Compulsory : clause::Inclusion::Optional;
    UnitPath p = parent.child(u.label);
    std::size_t idx = c.nodes.size();
    c.nodes.push_back({p, u.compulsory(), true});
    if (depth < 3 && budget >= 2 && coin(0.35)) {
      c.nodes[idx].atomic = false;
      int kids = uni(1, std::min(3, budget));
      for (int i = 0; i < kids && budget > 0; ++i) {
        u.children.push_back(make(p, depth + 1));
        u.children.back().order = i + 1;
      }
    } else {
      --budget;
      std::string frag = "f" + std::to_string(counter);
      u.versions.push_back({1, frag, {}, "", "", clause::Date{}});
      c.generic.fragments[frag] = "Text of " + u.label + ".\n";
      c.atomics.push_back(p);
    }
    return u;
  };

  c.generic.doc_type = "Random";
  c.generic.params = {{"x", clause::ValueKind::Integer, false, std::nullopt},
                      {"y", clause::ValueKind::String, false, std::nullopt}};
  for (int i = 0; budget > 0; ++i) {
    c.generic.parts.push_back(make({}, 1));
    c.generic.parts.back().order = i + 1;
  }

  auto any_path = [&]() { return c.nodes[uni(0, int(c.nodes.size()) - 1)].path; };
  int n = uni(0, max_constraints);
  for (int i = 0; i < n; ++i) {
    Rule r;
    r.kind = static_cast<CKind>(uni(0, 5));
    r.a = any_path();
    r.b = any_path();
    if (r.kind != CKind::Data && r.kind != CKind::ForcesCond && r.a == r.b) continue;
    r.guarded = r.kind != CKind::Refers && r.kind != CKind::Data && coin(0.4);
    if (r.guarded) r.guard = random_cond(rng);
    r.cond = random_cond(rng);
    std::optional<clause::CondExpr> guard;
    if (r.guarded) guard = clause::parse_cond(r.guard.text());
    switch (r.kind) {
      case CKind::ForcesUnit: c.generic.constraints.push_back(clause::Forces{r.a, r.b, guard}); break;
      case CKind::ForcesCond:
        c.generic.constraints.push_back(clause::Forces{clause::parse_cond(r.cond.text()), r.b, guard});
        break;
      case CKind::Incompatible: c.generic.constraints.push_back(clause::Incompatible{r.a, r.b, guard}); break;
      case CKind::ExclusiveOr: c.generic.constraints.push_back(clause::ExclusiveOr{r.a, r.b, guard}); break;
      case CKind::Refers: c.generic.constraints.push_back(clause::Refers{r.a, r.b}); break;
      case CKind::Data: c.generic.constraints.push_back(clause::DataConstraint{clause::parse_cond(r.cond.text()), ""}); break;
    }
    c.rules.push_back(std::move(r));
  }
  c.x = uni(0, 4);
  static const char* ys[] = {"a", "b", "c"};
  c.y = ys[uni(0, 2)];
  return c;
}

// Instance whose selected text is exactly the atomic units in `mask`.
inline clause::DocumentInstance instance_for(const Case& c, std::uint32_t mask) {
  clause::DocumentInstance inst;
  inst.doc_type = c.generic.doc_type;
  inst.id = "T1";
  inst.set_binding({}, "x", c.x);
  inst.set_binding({}, "y", c.y);
  for (std::size_t i = 0; i < c.atomics.size(); ++i) {
    if (!(mask >> i & 1u)) continue;
    inst.selections[c.atomics[i]] = 1;
    for (UnitPath q = c.atomics[i].parent(); !q.empty(); q = q.parent()) inst.included_optional.insert(q);
  }
  // Only optional groups belong in included_optional.
  for (const auto& n : c.nodes)
    if (n.compulsory || n.atomic) inst.included_optional.erase(n.path);
  return inst;
}

// A group is in the document when its parent is and it is compulsory or
// holds selected text; text is in the document when selected and its
// parent is.
inline std::set<UnitPath> present_units(const Case& c, std::uint32_t mask) {
  std::set<UnitPath> selected;
  for (std::size_t i = 0; i < c.atomics.size(); ++i)
    if (mask >> i & 1u) selected.insert(c.atomics[i]);
  std::set<UnitPath> out;
  for (const auto& n : c.nodes) {  // pre-order: parents first
    bool parent_in = n.path.depth() == 1 || out.count(n.path.parent());
    if (!parent_in) continue;
    if (n.atomic) {
      if (selected.count(n.path)) out.insert(n.path);
    } else {
      bool holds_text = false;
      for (const auto& s : selected) holds_text |= n.path.is_prefix_of(s);
      if (n.compulsory || holds_text) out.insert(n.path);
    }
  }
  return out;
}

struct Verdict {
  bool ok = true;
  std::set<UnitPath> missing_compulsory;
  std::set<std::size_t> broken;  // rule indices violated as stated
};

inline Verdict judge(const Case& c, std::uint32_t mask) {
  Verdict v;
  std::set<UnitPath> in = present_units(c, mask);
  auto has = [&](const UnitPath& p) { return in.count(p) > 0; };
  for (const auto& n : c.nodes) {
    bool parent_in = n.path.depth() == 1 || has(n.path.parent());
    if (n.compulsory && parent_in && !has(n.path)) v.missing_compulsory.insert(n.path);
  }
  for (std::size_t i = 0; i < c.rules.size(); ++i) {
    const Rule& r = c.rules[i];
    bool g = !r.guarded || r.guard.eval(c.x, c.y);
    bool broken = false;
    switch (r.kind) {
      case CKind::ForcesUnit: broken = g && has(r.a) && !has(r.b); break;
      case CKind::ForcesCond: broken = g && r.cond.eval(c.x, c.y) && !has(r.b); break;
      case CKind::Incompatible: broken = g && has(r.a) && has(r.b); break;
      case CKind::ExclusiveOr: {
        bool scope = true;
        for (const auto* e : {&r.a, &r.b})
          for (UnitPath q = e->parent(); !q.empty(); q = q.parent()) scope &= has(q);
        broken = g && scope && has(r.a) == has(r.b);
        break;
      }
      case CKind::Refers: broken = has(r.a) && !has(r.b); break;
      case CKind::Data: broken = !r.cond.eval(c.x, c.y); break;
    }
    if (broken) v.broken.insert(i);
  }
  v.ok = v.missing_compulsory.empty() && v.broken.empty();
  return v;
}

// Units the document must contain for the present ones to be complete:
// present units, compulsory children of required groups, consequents of
// firing forces and references, and the parents of all of these.
inline std::set<UnitPath> required_closure(const Case& c, std::uint32_t mask) {
  std::set<UnitPath> req = present_units(c, mask);
  for (bool grew = true; grew;) {
    grew = false;
    auto add = [&](const UnitPath& p) {
      for (UnitPath q = p; !q.empty(); q = q.parent()) grew |= req.insert(q).second;
    };
    for (const auto& n : c.nodes)
      if (n.compulsory && (n.path.depth() == 1 || req.count(n.path.parent()))) add(n.path);
    for (const auto& r : c.rules) {
      bool g = !r.guarded || r.guard.eval(c.x, c.y);
      if (r.kind == CKind::ForcesUnit && g && req.count(r.a)) add(r.b);
      if (r.kind == CKind::ForcesCond && g && r.cond.eval(c.x, c.y)) add(r.b);
      if (r.kind == CKind::Refers && req.count(r.a)) add(r.b);
    }
  }
  return req;
}

// Rule indices check() should name: the rules broken as stated plus the
// forces whose antecedent unit is required but not yet present.
inline std::set<std::size_t> expected_sources(const Case& c, std::uint32_t mask) {
  std::set<std::size_t> out = judge(c, mask).broken;
  std::set<UnitPath> in = present_units(c, mask);
  std::set<UnitPath> req = required_closure(c, mask);
  for (std::size_t i = 0; i < c.rules.size(); ++i) {
    const Rule& r = c.rules[i];
    bool g = !r.guarded || r.guard.eval(c.x, c.y);
    if (r.kind == CKind::ForcesUnit && g && req.count(r.a) && !in.count(r.b)) out.insert(i);
  }
  return out;
}

}  // namespace oracle
