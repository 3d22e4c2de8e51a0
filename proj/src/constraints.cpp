#include "clause/constraints.hpp"

#include <algorithm>
#include <regex>

#include "clause/error.hpp"
#include "clause/render.hpp"

namespace clause {

std::string_view violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::MissingCompulsory: return "missing_compulsory";
    case ViolationKind::ForcesUnsatisfied: return "forces_unsatisfied";
    case ViolationKind::IncompatiblePair: return "incompatible_pair";
    case ViolationKind::ExclusiveOrUnsatisfied: return "exclusive_or_unsatisfied";
    case ViolationKind::DanglingReference: return "dangling_reference";
    case ViolationKind::DataViolation: return "data_violation";
    case ViolationKind::MissingParameter: return "missing_parameter";
  }
  return "";
}

std::optional<ViolationKind> violation_kind_from_name(std::string_view name) {
  for (auto k : {ViolationKind::MissingCompulsory, ViolationKind::ForcesUnsatisfied,
                 ViolationKind::IncompatiblePair, ViolationKind::ExclusiveOrUnsatisfied,
                 ViolationKind::DanglingReference, ViolationKind::DataViolation,
                 ViolationKind::MissingParameter})
    if (violation_kind_name(k) == name) return k;
  return std::nullopt;
}

std::string_view remedy_action_name(Remedy::Action a) {
  switch (a) {
    case Remedy::Action::Include: return "include";
    case Remedy::Action::Exclude: return "exclude";
    case Remedy::Action::SetParameter: return "set_parameter";
  }
  return "";
}

std::string describe(const Subject& s) {
  if (const auto* p = std::get_if<UnitPath>(&s)) return "'" + p->str() + "'";
  return "$" + std::get<ParamName>(s).name;
}

namespace {

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
  return Tri::True;
}

Tri guard_value(const std::optional<CondExpr>& guard, const Env& env) {
  return guard ? eval_cond(*guard, env) : Tri::True;
}

std::set<UnitPath> included_units(const GenericDocument& g, const DocumentInstance& inst) {
  std::set<UnitPath> out;
  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate&) {
    if (is_included(g, inst, p)) out.insert(p);
  });
  return out;
}

std::set<UnitPath> closure(const GenericDocument& g, const std::set<UnitPath>& included,
                           const Env& env) {
  std::set<UnitPath> req;
  for (const auto& part : g.parts)
    if (part.compulsory()) req.insert(UnitPath{part.label});

  auto present = [&](const UnitPath& p) { return included.count(p) || req.count(p); };

  // Condition-antecedent Forces do not depend on the inclusion state.
  std::vector<std::pair<const Forces*, Tri>> forces;
  for (const auto& c : g.constraints) {
    if (const auto* f = std::get_if<Forces>(&c)) {
      Tri fire = guard_value(f->guard, env);
      if (const auto* cond = std::get_if<CondExpr>(&f->antecedent))
        fire = tri_and(fire, eval_cond(*cond, env));
      forces.emplace_back(f, fire);
    }
  }

  for (bool changed = true; changed;) {
    changed = false;
    auto add = [&](const UnitPath& p) {
      if (!p.empty() && req.insert(p).second) changed = true;
    };
    for_each_unit(g, [&](const UnitPath& p, const UnitTemplate& u) {
      if (u.atomic() || !present(p)) return;
      for (const auto& c : u.children)
        if (c.compulsory()) add(p.child(c.label));
    });
    for (const auto& p : std::vector<UnitPath>(req.begin(), req.end()))
      for (UnitPath q = p.parent(); !q.empty(); q = q.parent()) add(q);
    for (const auto& [f, fire] : forces) {
      if (fire != Tri::True) continue;
      const auto* a = std::get_if<UnitPath>(&f->antecedent);
      if (!a || present(*a)) add(f->consequent);
    }
    for (const auto& c : g.constraints)
      if (const auto* r = std::get_if<Refers>(&c); r && present(r->from)) add(r->to);
  }
  return req;
}

Violation make(ViolationKind kind, std::vector<Subject> subjects, std::optional<std::size_t> source,
               std::string message, bool pending = false) {
  Violation v{kind, std::move(subjects), source, std::move(message), pending};
  if (pending) v.message = "pending on unbound values: " + v.message;
  return v;
}

std::vector<Subject> param_subjects(const std::set<std::string>& names) {
  std::vector<Subject> out;
  for (const auto& n : names) out.push_back(ParamName{n});
  return out;
}

void check_missing_parameters(const GenericDocument& g, const DocumentInstance& inst,
                              const std::set<UnitPath>& included, std::vector<Violation>& out) {
  auto missing = [&](const std::string& name, const UnitPath& scope, const std::string& why) {
    std::vector<Subject> subjects{ParamName{name}};
    if (!scope.empty()) subjects.push_back(scope);
    out.push_back(make(ViolationKind::MissingParameter, std::move(subjects), std::nullopt, why));
  };

  Env doc = document_env(g, inst);
  for (std::string_view builtin : {"Party1.Name", "Party2.Name", "Date"})
    if (!doc.count(std::string(builtin)))
      missing(std::string(builtin), {}, "a value for $" + std::string(builtin) + " is required");
  for (const auto& s : g.params)
    if (s.required && !doc.count(s.name))
      missing(s.name, {}, "a value for $" + s.name + " is required");

  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate& u) {
    if (!included.count(p)) return;
    int version = u.atomic() ? inst.selections.at(p) : 0;
    Env env = u.atomic() ? effective_bindings(g, inst, p, version) : Env{};
    if (!u.atomic()) {
      // Unit-level view: this unit's scope upwards.
      for (UnitPath scope = p; !scope.empty(); scope = scope.parent()) {
        for (const auto& b : inst.bindings)
          if (b.scope == scope) env.emplace(b.name, b.value);
        for (const auto& s : resolve_unit(g, scope).params)
          if (s.default_value) env.emplace(s.name, *s.default_value);
      }
      for (const auto& [k, v] : doc) env.emplace(k, v);
    }
    std::set<std::string> reported;
    auto need = [&](const ParamSpec& s) {
      if (s.required && !env.count(s.name) && reported.insert(s.name).second)
        missing(s.name, p, "'" + p.str() + "' requires a value for $" + s.name);
    };
    for (const auto& s : u.params) need(s);
    if (!u.atomic()) return;
    const TextVersion* v = u.find_version(version);
    if (!v) return;
    for (const auto& s : v->params) need(s);
    auto frag = g.fragments.find(v->fragment);
    if (frag == g.fragments.end()) return;
    for (const auto& name : unbound_placeholders(frag->second, env)) {
      if (doc.count(name) || !reported.insert(name).second) continue;
      // Document-level names were already reported above.
      bool declared_at_doc = std::any_of(g.params.begin(), g.params.end(),
                                         [&](const ParamSpec& s) { return s.name == name; });
      if (declared_at_doc) continue;
      missing(name, p, "'" + p.str() + "' uses $" + name + " which has no value");
    }
  });
}

}  // namespace

std::set<UnitPath> required_units(const GenericDocument& g, const DocumentInstance& inst) {
  return closure(g, included_units(g, inst), document_env(g, inst));
}

std::vector<Violation> check(const GenericDocument& g, const DocumentInstance& inst, CheckStage stage) {
  Env env = document_env(g, inst);
  std::set<UnitPath> inc = included_units(g, inst);
  std::set<UnitPath> req = closure(g, inc, env);
  auto has = [&](const UnitPath& p) { return inc.count(p) > 0; };
  std::vector<Violation> out;

  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate& u) {
    if (!u.compulsory() || has(p)) return;
    if (p.depth() > 1 && !has(p.parent())) return;
    out.push_back(make(ViolationKind::MissingCompulsory, {p}, std::nullopt,
                       "compulsory unit '" + p.str() + "' is not included"));
  });

  for (std::size_t i = 0; i < g.constraints.size(); ++i) {
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Forces>) {
            if (has(c.consequent)) return;
            Tri fire = guard_value(c.guard, env);
            std::string because;
            if (const auto* a = std::get_if<UnitPath>(&c.antecedent)) {
              bool on = has(*a) || req.count(*a);
              fire = tri_and(fire, on ? Tri::True : Tri::False);
              because = "'" + a->str() + "' is included";
            } else {
              const auto& cond = std::get<CondExpr>(c.antecedent);
              fire = tri_and(fire, eval_cond(cond, env));
              because = "condition '" + print_cond(cond) + "' holds";
            }
            if (fire == Tri::False) return;
            if (c.guard) because += " and '" + print_cond(*c.guard) + "' holds";
            std::string msg = fire == Tri::Unknown
                                  ? "'" + c.consequent.str() + "' must be included if " + because
                                  : because + ", so '" + c.consequent.str() + "' must be included";
            out.push_back(make(ViolationKind::ForcesUnsatisfied, {c.consequent}, i, msg,
                               fire == Tri::Unknown));
          } else if constexpr (std::is_same_v<C, Incompatible>) {
            if (!has(c.a) || !has(c.b)) return;
            Tri fire = guard_value(c.guard, env);
            if (fire == Tri::False) return;
            out.push_back(make(ViolationKind::IncompatiblePair, {c.a, c.b}, i,
                               "'" + c.a.str() + "' and '" + c.b.str() + "' cannot both appear",
                               fire == Tri::Unknown));
          } else if constexpr (std::is_same_v<C, ExclusiveOr>) {
            // Only among units whose ancestors are all present.
            for (const auto* end : {&c.a, &c.b})
              for (UnitPath q = end->parent(); !q.empty(); q = q.parent())
                if (!has(q)) return;
            int n = int(has(c.a)) + int(has(c.b));
            if (n == 1) return;
            Tri fire = guard_value(c.guard, env);
            if (fire == Tri::False) return;
            out.push_back(make(ViolationKind::ExclusiveOrUnsatisfied, {c.a, c.b}, i,
                               "exactly one of '" + c.a.str() + "' and '" + c.b.str() +
                                   "' must be included (" + std::to_string(n) + " are)",
                               fire == Tri::Unknown));
          } else if constexpr (std::is_same_v<C, Refers>) {
            if (has(c.from) && !has(c.to))
              out.push_back(make(ViolationKind::DanglingReference, {c.from, c.to}, i,
                                 "'" + c.from.str() + "' refers to '" + c.to.str() +
                                     "', which is not included"));
          } else {
            Tri r = eval_cond(c.expr, env);
            if (r == Tri::True) return;
            std::string msg = c.message.empty() ? "condition '" + print_cond(c.expr) + "' fails"
                                                : c.message;
            out.push_back(make(ViolationKind::DataViolation, param_subjects(free_refs(c.expr)), i,
                               msg, r == Tri::Unknown));
          }
        },
        g.constraints[i]);
  }

  if (stage == CheckStage::Finalize) check_missing_parameters(g, inst, inc, out);
  return out;
}

namespace {

bool same_violation(const Violation& a, const Violation& b) {
  return a.kind == b.kind && a.source == b.source && a.subjects == b.subjects;
}

bool clears(const Remedy& r, const Violation& v, const GenericDocument& g,
            const DocumentInstance& inst) {
  DocumentInstance trial = inst;
  try {
    apply_remedy(r, g, trial);
  } catch (const Error&) {
    return false;
  }
  auto after = check(g, trial, CheckStage::Interactive);
  return std::none_of(after.begin(), after.end(),
                      [&](const Violation& w) { return same_violation(v, w); });
}

std::set<std::string> unbound_refs(const CondExpr& e, const Env& env) {
  std::set<std::string> out;
  for (const auto& n : free_refs(e))
    if (!env.count(n)) out.insert(n);
  return out;
}

}  // namespace

std::vector<Remedy> suggest_remedies(const Violation& v, const GenericDocument& g,
                                     const DocumentInstance& inst) {
  std::vector<Remedy> candidates;
  auto include = [&](const UnitPath& p, std::string why) {
    candidates.push_back({Remedy::Action::Include, p, std::move(why)});
  };
  auto exclude = [&](const UnitPath& p, std::string why) {
    const UnitTemplate* u = find_unit(g, p);
    if (u && !u->compulsory()) candidates.push_back({Remedy::Action::Exclude, p, std::move(why)});
  };
  auto set_param = [&](const std::string& name, std::string why) {
    candidates.push_back({Remedy::Action::SetParameter, ParamName{name}, std::move(why)});
  };
  auto path_at = [&](std::size_t i) -> const UnitPath& { return std::get<UnitPath>(v.subjects.at(i)); };

  const Constraint* src = v.source ? &g.constraints.at(*v.source) : nullptr;
  Env env = document_env(g, inst);

  if (v.pending && src) {
    std::set<std::string> names;
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, DataConstraint>) {
            names = unbound_refs(c.expr, env);
          } else if constexpr (!std::is_same_v<C, Refers>) {
            if (c.guard) names = unbound_refs(*c.guard, env);
            if constexpr (std::is_same_v<C, Forces>)
              if (const auto* cond = std::get_if<CondExpr>(&c.antecedent))
                names.merge(unbound_refs(*cond, env));
          }
        },
        *src);
    for (const auto& n : names) set_param(n, "enter a value for $" + n + " so the constraint can be decided");
  }

  switch (v.kind) {
    case ViolationKind::MissingCompulsory:
      include(path_at(0), "the unit is compulsory");
      break;
    case ViolationKind::ForcesUnsatisfied:
      include(path_at(0), "required by a forces constraint");
      break;
    case ViolationKind::DanglingReference:
      include(path_at(1), "'" + path_at(0).str() + "' refers to it");
      break;
    case ViolationKind::IncompatiblePair:
      exclude(path_at(0), "incompatible with '" + path_at(1).str() + "'");
      exclude(path_at(1), "incompatible with '" + path_at(0).str() + "'");
      break;
    case ViolationKind::ExclusiveOrUnsatisfied: {
      bool a_in = is_included(g, inst, path_at(0));
      bool b_in = is_included(g, inst, path_at(1));
      if (!a_in && !b_in) {
        include(path_at(0), "exactly one of the pair must be included");
        include(path_at(1), "exactly one of the pair must be included");
      } else if (a_in && b_in) {
        exclude(path_at(0), "only one of the pair may be included");
        exclude(path_at(1), "only one of the pair may be included");
      }
      break;
    }
    case ViolationKind::MissingParameter:
      set_param(std::get<ParamName>(v.subjects.at(0)).name, "the parameter is required");
      break;
    case ViolationKind::DataViolation:
      if (!v.pending)
        for (const auto& s : v.subjects)
          set_param(std::get<ParamName>(s).name, "change $" + std::get<ParamName>(s).name +
                                                     " so that: " + v.message);
      break;
  }

  std::vector<Remedy> out;
  for (auto& r : candidates) {
    if (std::find(out.begin(), out.end(), r) != out.end()) continue;
    if (r.action != Remedy::Action::SetParameter && !clears(r, v, g, inst)) continue;
    out.push_back(std::move(r));
  }
  return out;
}

void apply_remedy(const Remedy& r, const GenericDocument& g, DocumentInstance& inst) {
  switch (r.action) {
    case Remedy::Action::Include:
      include_unit(g, inst, std::get<UnitPath>(r.target));
      break;
    case Remedy::Action::Exclude:
      exclude_unit(g, inst, std::get<UnitPath>(r.target));
      break;
    case Remedy::Action::SetParameter:
      break;
  }
}

std::map<UnitPath, std::string> generic_numbering(const GenericDocument& g) {
  std::map<UnitPath, std::string> out;
  std::function<void(const std::vector<UnitTemplate>&, const UnitPath&, const std::string&)> level =
      [&](const std::vector<UnitTemplate>& siblings, const UnitPath& parent, const std::string& prefix) {
        int n = 0;
        for (const UnitTemplate* u : ordered(siblings)) {
          UnitPath p = parent.child(u->label);
          std::string number = prefix.empty() ? std::to_string(++n) : prefix + "-" + std::to_string(++n);
          out[p] = number;
          level(u->children, p, number);
        }
      };
  level(g.parts, {}, "");
  return out;
}

std::vector<Refers> scan_cross_references(const GenericDocument& g) {
  static const std::regex kRef(R"(\b(?:sub-clause|clause|section)\s+(\d+(?:-\d+)*))",
                               std::regex::icase | std::regex::ECMAScript);
  std::map<std::string, UnitPath> by_number;
  for (const auto& [path, number] : generic_numbering(g)) by_number[number] = path;

  std::set<std::pair<UnitPath, UnitPath>> known;
  for (const auto& c : g.constraints)
    if (const auto* r = std::get_if<Refers>(&c)) known.insert({r->from, r->to});

  std::vector<Refers> out;
  for (const auto& p : atomic_units(g)) {
    const UnitTemplate& u = resolve_unit(g, p);
    for (const auto& v : u.versions) {
      auto it = g.fragments.find(v.fragment);
      if (it == g.fragments.end())
        throw Error(ErrorCode::FragmentUnreadable, "fragment '" + v.fragment + "' is unreadable",
                    {v.fragment});
      const std::string& text = it->second;
      for (std::sregex_iterator m(text.begin(), text.end(), kRef), end; m != end; ++m) {
        auto target = by_number.find((*m)[1].str());
        if (target == by_number.end() || target->second == p) continue;
        if (known.insert({p, target->second}).second) out.push_back({p, target->second});
      }
    }
  }
  return out;
}

}  // namespace clause
