#include "clause/document.hpp"

#include <algorithm>
#include <cctype>

#include "clause/error.hpp"

namespace clause {

// --- UnitPath ----------------------------------------------------------------

UnitPath UnitPath::parent() const {
  if (labels.empty()) return {};
  return UnitPath(std::vector<std::string>(labels.begin(), labels.end() - 1));
}

UnitPath UnitPath::child(std::string label) const {
  UnitPath p = *this;
  p.labels.push_back(std::move(label));
  return p;
}

bool UnitPath::is_prefix_of(const UnitPath& other) const {
  return labels.size() <= other.labels.size() &&
         std::equal(labels.begin(), labels.end(), other.labels.begin());
}

std::string UnitPath::str() const {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += '/';
    out += labels[i];
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

UnitPath parse_path(std::string_view text) {
  UnitPath p;
  std::string t = trim(text);
  if (t.empty()) return p;
  std::size_t start = 0;
  for (;;) {
    auto slash = t.find('/', start);
    p.labels.push_back(trim(std::string_view(t).substr(start, slash - start)));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return p;
}

// --- UnitTemplate / DocumentInstance ------------------------------------------

const TextVersion* UnitTemplate::find_version(int number) const {
  for (const auto& v : versions)
    if (v.number == number) return &v;
  return nullptr;
}

int UnitTemplate::max_version() const {
  int m = 0;
  for (const auto& v : versions) m = std::max(m, v.number);
  return m;
}

const Value* DocumentInstance::find_binding(const UnitPath& scope, std::string_view name) const {
  for (const auto& b : bindings)
    if (b.scope == scope && b.name == name) return &b.value;
  return nullptr;
}

void DocumentInstance::set_binding(UnitPath scope, std::string name, Value value) {
  for (auto& b : bindings) {
    if (b.scope == scope && b.name == name) {
      b.value = std::move(value);
      return;
    }
  }
  bindings.push_back({std::move(scope), std::move(name), std::move(value)});
  std::sort(bindings.begin(), bindings.end(), [](const ParamBinding& a, const ParamBinding& b) {
    return std::tie(a.scope, a.name) < std::tie(b.scope, b.name);
  });
}

// --- tree navigation ---------------------------------------------------------

const UnitTemplate* find_unit(const GenericDocument& g, const UnitPath& p) {
  if (p.empty()) return nullptr;
  const std::vector<UnitTemplate>* level = &g.parts;
  const UnitTemplate* node = nullptr;
  for (const auto& label : p.labels) {
    node = nullptr;
    for (const auto& u : *level) {
      if (u.label == label) {
        node = &u;
        break;
      }
    }
    if (!node) return nullptr;
    level = &node->children;
  }
  return node;
}

const UnitTemplate& resolve_unit(const GenericDocument& g, const UnitPath& p) {
  const UnitTemplate* u = find_unit(g, p);
  if (!u) throw Error(ErrorCode::NotFound, "no unit at path '" + p.str() + "'", {p.str()});
  return *u;
}

const std::vector<UnitTemplate>& children_of(const GenericDocument& g, const UnitPath& parent) {
  if (parent.empty()) return g.parts;
  return resolve_unit(g, parent).children;
}

std::vector<const UnitTemplate*> ordered(const std::vector<UnitTemplate>& siblings,
                                         const std::vector<std::string>* override_labels) {
  std::vector<const UnitTemplate*> out;
  out.reserve(siblings.size());
  for (const auto& u : siblings) out.push_back(&u);
  if (override_labels && override_labels->size() == siblings.size()) {
    auto rank = [&](const UnitTemplate* u) {
      auto it = std::find(override_labels->begin(), override_labels->end(), u->label);
      return it - override_labels->begin();
    };
    std::stable_sort(out.begin(), out.end(),
                     [&](const UnitTemplate* a, const UnitTemplate* b) { return rank(a) < rank(b); });
  } else {
    std::stable_sort(out.begin(), out.end(),
                     [](const UnitTemplate* a, const UnitTemplate* b) { return a->order < b->order; });
  }
  return out;
}

namespace {

void walk(const std::vector<UnitTemplate>& level, const UnitPath& prefix,
          const std::function<void(const UnitPath&, const UnitTemplate&)>& fn) {
  for (const UnitTemplate* u : ordered(level)) {
    UnitPath p = prefix.child(u->label);
    fn(p, *u);
    walk(u->children, p, fn);
  }
}

}  // namespace

void for_each_unit(const GenericDocument& g,
                   const std::function<void(const UnitPath&, const UnitTemplate&)>& fn) {
  walk(g.parts, {}, fn);
}

std::vector<UnitPath> atomic_units(const GenericDocument& g, const std::optional<UnitPath>& within) {
  std::vector<UnitPath> out;
  if (within) {
    const UnitTemplate& root = resolve_unit(g, *within);
    if (root.atomic()) return {*within};
    walk(root.children, *within, [&](const UnitPath& p, const UnitTemplate& u) {
      if (u.atomic()) out.push_back(p);
    });
    return out;
  }
  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate& u) {
    if (u.atomic()) out.push_back(p);
  });
  return out;
}

// --- validation ----------------------------------------------------------------

namespace {

void check_params(const std::vector<ParamSpec>& params, const std::string& where,
                  std::vector<std::string>& errors) {
  std::set<std::string> seen;
  for (const auto& p : params) {
    if (!is_identifier(p.name)) errors.push_back(where + ": invalid parameter name '" + p.name + "'");
    if (!seen.insert(p.name).second)
      errors.push_back(where + ": duplicate parameter '" + p.name + "'");
    if (p.default_value && kind_of(*p.default_value) != p.kind)
      errors.push_back(where + ": default for '" + p.name + "' is not a " +
                       std::string(kind_name(p.kind)));
  }
}

bool fragment_id_ok(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

void validate_level(const std::vector<UnitTemplate>& level, const UnitPath& prefix,
                    std::set<std::string>& fragment_ids, std::vector<std::string>& errors) {
  std::string where_parent = prefix.empty() ? "document" : "'" + prefix.str() + "'";
  std::set<std::string> labels;
  std::vector<int> orders;
  for (const auto& u : level) {
    UnitPath p = prefix.child(u.label);
    std::string where = "'" + p.str() + "'";
    if (trim(u.label).empty()) errors.push_back(where_parent + ": empty unit label");
    if (u.label.find('/') != std::string::npos)
      errors.push_back(where + ": label must not contain '/'");
    if (!labels.insert(u.label).second)
      errors.push_back(where_parent + ": duplicate sibling label '" + u.label + "'");
    orders.push_back(u.order);
    check_params(u.params, where, errors);

    if (u.children.empty() && u.versions.empty())
      errors.push_back(where + ": unit has neither children nor versions (empty version list)");
    if (!u.children.empty() && !u.versions.empty())
      errors.push_back(where + ": unit has both children and versions");

    std::vector<int> numbers;
    for (const auto& v : u.versions) {
      numbers.push_back(v.number);
      std::string vwhere = where + " version " + std::to_string(v.number);
      check_params(v.params, vwhere, errors);
      if (!fragment_id_ok(v.fragment))
        errors.push_back(vwhere + ": invalid fragment id '" + v.fragment + "'");
      else if (!fragment_ids.insert(v.fragment).second)
        errors.push_back(vwhere + ": fragment id '" + v.fragment + "' used twice");
    }
    std::sort(numbers.begin(), numbers.end());
    for (std::size_t i = 0; i < numbers.size(); ++i) {
      if (numbers[i] != static_cast<int>(i) + 1) {
        errors.push_back(where + ": version numbers are not contiguous from 1");
        break;
      }
    }
    validate_level(u.children, p, fragment_ids, errors);
  }
  std::sort(orders.begin(), orders.end());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] != static_cast<int>(i) + 1) {
      errors.push_back(where_parent + ": sibling order values are not a permutation of 1.." +
                       std::to_string(orders.size()));
      break;
    }
  }
}

// Compulsory all the way from the root: present in every instance.
bool always_present(const GenericDocument& g, const UnitPath& p) {
  for (std::size_t n = 1; n <= p.depth(); ++n) {
    UnitPath prefix(std::vector<std::string>(p.labels.begin(), p.labels.begin() + n));
    const UnitTemplate* u = find_unit(g, prefix);
    if (!u || !u->compulsory()) return false;
  }
  return true;
}

}  // namespace

ValidationReport validate_generic(const GenericDocument& g) {
  ValidationReport r;
  if (trim(g.doc_type).empty()) r.errors.push_back("document type is empty");
  if (g.parts.empty()) r.errors.push_back("generic document has no parts");
  check_params(g.params, "document", r.errors);
  std::set<std::string> fragment_ids;
  validate_level(g.parts, {}, fragment_ids, r.errors);

  auto need = [&](const UnitPath& p, std::size_t idx) {
    if (!find_unit(g, p))
      r.errors.push_back("constraint " + std::to_string(idx) + ": unresolved path '" + p.str() + "'");
  };
  for (std::size_t i = 0; i < g.constraints.size(); ++i) {
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, Forces>) {
            if (const auto* a = std::get_if<UnitPath>(&c.antecedent)) need(*a, i);
            need(c.consequent, i);
          } else if constexpr (std::is_same_v<C, Incompatible> || std::is_same_v<C, ExclusiveOr>) {
            need(c.a, i);
            need(c.b, i);
            if (c.a == c.b)
              r.errors.push_back("constraint " + std::to_string(i) + ": both ends are '" +
                                 c.a.str() + "'");
          } else if constexpr (std::is_same_v<C, Refers>) {
            need(c.from, i);
            need(c.to, i);
          }
        },
        g.constraints[i]);
  }

  // Syntactically obvious conflicts: Forces(A -> B) and Incompatible(A, B),
  // both unguarded, with A present in every instance.
  for (const auto& c : g.constraints) {
    const auto* f = std::get_if<Forces>(&c);
    if (!f || f->guard) continue;
    const auto* a = std::get_if<UnitPath>(&f->antecedent);
    if (!a || !always_present(g, *a)) continue;
    for (const auto& d : g.constraints) {
      const auto* inc = std::get_if<Incompatible>(&d);
      if (!inc || inc->guard) continue;
      if ((inc->a == *a && inc->b == f->consequent) || (inc->b == *a && inc->a == f->consequent))
        r.warnings.push_back("'" + a->str() + "' is always present, forces '" +
                             f->consequent.str() + "' and is incompatible with it");
    }
  }
  return r;
}

// --- versions ------------------------------------------------------------------

std::string slugify(std::string_view text) {
  std::string out;
  bool dash = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
      dash = false;
    } else if (!dash && !out.empty()) {
      out += '-';
      dash = true;
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

namespace {

UnitTemplate* find_unit_mut(GenericDocument& g, const UnitPath& p) {
  return const_cast<UnitTemplate*>(find_unit(g, p));
}

bool fragment_id_taken(const GenericDocument& g, const std::string& id) {
  if (g.fragments.count(id)) return true;
  bool taken = false;
  for_each_unit(g, [&](const UnitPath&, const UnitTemplate& u) {
    for (const auto& v : u.versions)
      if (v.fragment == id) taken = true;
  });
  return taken;
}

}  // namespace

std::pair<GenericDocument, int> add_version(GenericDocument g, const UnitPath& p, NewVersion nv) {
  UnitTemplate* u = find_unit_mut(g, p);
  if (!u) throw Error(ErrorCode::NotFound, "no unit at path '" + p.str() + "'", {p.str()});
  if (!u->atomic()) throw Error(ErrorCode::NotAtomic, "'" + p.str() + "' is not an atomic unit");

  int number = u->max_version() + 1;
  std::string base;
  for (const auto& l : p.labels) {
    if (!base.empty()) base += "--";
    base += slugify(l);
  }
  std::string id = base + "--v" + std::to_string(number);
  for (int k = 2; fragment_id_taken(g, id); ++k)
    id = base + "--v" + std::to_string(number) + "-" + std::to_string(k);

  TextVersion v;
  v.number = number;
  v.fragment = id;
  v.params = std::move(nv.params);
  v.commentary = std::move(nv.commentary);
  v.author = std::move(nv.author);
  v.created = nv.created;
  u->versions.push_back(std::move(v));
  g.fragments[id] = std::move(nv.text);
  return {std::move(g), number};
}

// --- bindings ------------------------------------------------------------------

namespace {

void add_builtins(const DocumentInstance& inst, Env& env) {
  auto put = [&](std::string_view name, const std::string& v) {
    if (!v.empty()) env.emplace(std::string(name), v);
  };
  put("Party1.Name", inst.parties[0].name);
  put("Party1.Address", inst.parties[0].address);
  put("Party2.Name", inst.parties[1].name);
  put("Party2.Address", inst.parties[1].address);
  if (inst.date) env.emplace("Date", *inst.date);
}

void add_bindings(const DocumentInstance& inst, const UnitPath& scope, Env& env) {
  for (const auto& b : inst.bindings)
    if (b.scope == scope) env.emplace(b.name, b.value);
}

void add_defaults(const std::vector<ParamSpec>& specs, Env& env) {
  for (const auto& s : specs)
    if (s.default_value) env.emplace(s.name, *s.default_value);
}

}  // namespace

Env effective_bindings(const GenericDocument& g, const DocumentInstance& inst, const UnitPath& p,
                       int version) {
  Env env;
  // Instance bindings first, nearest scope first; emplace never overrides.
  for (UnitPath scope = p; !scope.empty(); scope = scope.parent()) add_bindings(inst, scope, env);
  add_bindings(inst, {}, env);
  if (const TextVersion* v = resolve_unit(g, p).find_version(version)) add_defaults(v->params, env);
  for (UnitPath scope = p; !scope.empty(); scope = scope.parent()) add_defaults(resolve_unit(g, scope).params, env);
  add_defaults(g.params, env);
  add_builtins(inst, env);
  return env;
}

Env document_env(const GenericDocument& g, const DocumentInstance& inst) {
  Env env;
  add_bindings(inst, {}, env);
  add_defaults(g.params, env);
  add_builtins(inst, env);
  return env;
}

// --- inclusion -----------------------------------------------------------------

bool is_included(const GenericDocument& g, const DocumentInstance& inst, const UnitPath& p) {
  if (p.empty()) return true;
  UnitPath prefix;
  const UnitTemplate* u = nullptr;
  for (const auto& label : p.labels) {
    prefix = prefix.child(label);
    u = find_unit(g, prefix);
    if (!u) return false;
    if (!u->atomic() && !u->compulsory() && !inst.included_optional.count(prefix)) return false;
  }
  return !u->atomic() || inst.selections.count(p) > 0;
}

namespace {

void fill_level(const std::vector<UnitTemplate>& level, const UnitPath& prefix,
                DocumentInstance& inst) {
  for (const auto& u : level) {
    UnitPath p = prefix.child(u.label);
    if (u.atomic()) {
      if (u.compulsory() && !inst.selections.count(p)) {
        int lowest = u.versions.front().number;
        for (const auto& v : u.versions) lowest = std::min(lowest, v.number);
        inst.selections[p] = lowest;
      }
      continue;
    }
    if (u.compulsory() || inst.included_optional.count(p)) fill_level(u.children, p, inst);
  }
}

}  // namespace

void fill_compulsory(const GenericDocument& g, DocumentInstance& inst) {
  fill_level(g.parts, {}, inst);
}

void include_unit(const GenericDocument& g, DocumentInstance& inst, const UnitPath& p) {
  const UnitTemplate& target = resolve_unit(g, p);
  UnitPath prefix;
  for (const auto& label : p.labels) {
    prefix = prefix.child(label);
    const UnitTemplate& u = resolve_unit(g, prefix);
    if (!u.atomic() && !u.compulsory()) inst.included_optional.insert(prefix);
  }
  if (target.atomic() && !inst.selections.count(p)) {
    int lowest = target.versions.front().number;
    for (const auto& v : target.versions) lowest = std::min(lowest, v.number);
    inst.selections[p] = lowest;
  }
  fill_compulsory(g, inst);
}

void exclude_unit(const GenericDocument& g, DocumentInstance& inst, const UnitPath& p) {
  const UnitTemplate& u = resolve_unit(g, p);
  if (u.compulsory())
    throw Error(ErrorCode::EditRejected, "'" + p.str() + "' is compulsory and cannot be excluded");
  std::erase_if(inst.included_optional, [&](const UnitPath& q) { return p.is_prefix_of(q); });
  std::erase_if(inst.selections, [&](const auto& kv) { return p.is_prefix_of(kv.first); });
}

DocumentInstance new_draft(const GenericDocument& g, std::string id) {
  DocumentInstance inst;
  inst.doc_type = g.doc_type;
  inst.id = std::move(id);
  inst.status = InstanceStatus::Draft;
  fill_compulsory(g, inst);
  for_each_unit(g, [&](const UnitPath& p, const UnitTemplate& u) {
    if (!u.keyword_suggestions.empty()) inst.keywords[p] = u.keyword_suggestions;
  });
  return inst;
}

std::string_view tag_kind_name(TagKind k) { return k == TagKind::Duty ? "duty" : "right"; }

std::optional<TagKind> tag_kind_from_name(std::string_view name) {
  if (name == "duty") return TagKind::Duty;
  if (name == "right") return TagKind::Right;
  return std::nullopt;
}

}  // namespace clause
