#include "clause/serialize.hpp"

#include "clause/error.hpp"

namespace clause {

namespace {

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::BadRequest, why); }

const json& field(const json& j, const char* key) {
  if (!j.is_object()) bad(std::string("expected an object with field '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::string str(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Date date_from(const json& j) {
  if (!j.is_string()) bad("dates must be ISO strings");
  auto d = Date::parse_iso(j.get<std::string>());
  if (!d) bad("malformed date '" + j.get<std::string>() + "'");
  return *d;
}

ValueKind kind_from(const json& j) {
  if (!j.is_string()) bad("kind must be a string");
  auto k = kind_from_name(j.get<std::string>());
  if (!k) bad("unknown value kind '" + j.get<std::string>() + "'");
  return *k;
}

std::optional<CondExpr> opt_cond(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return parse_cond(it->get<std::string>());
}

json params_json(const std::vector<ParamSpec>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

std::vector<ParamSpec> params_from(const json& j) {
  std::vector<ParamSpec> out;
  auto it = j.find("params");
  if (it == j.end()) return out;
  for (const auto& p : *it) out.push_back(param_spec_from_json(p));
  return out;
}

json unit_json(const UnitTemplate& u) {
  json j;
  j["label"] = u.label;
  j["inclusion"] = u.compulsory() ? "compulsory" : "optional";
  j["order"] = u.order;
  j["params"] = params_json(u.params);
  j["commentary"] = u.commentary;
  j["keywords"] = u.keyword_suggestions;
  if (!u.children.empty()) {
    json c = json::array();
    for (const auto& child : u.children) c.push_back(unit_json(child));
    j["children"] = c;
  }
  if (!u.versions.empty()) {
    json vs = json::array();
    for (const auto& v : u.versions) {
      vs.push_back({{"number", v.number},
                    {"fragment", v.fragment},
                    {"params", params_json(v.params)},
                    {"commentary", v.commentary},
                    {"author", v.author},
                    {"created", v.created.iso()}});
    }
    j["versions"] = vs;
  }
  return j;
}

UnitTemplate unit_from(const json& j) {
  UnitTemplate u;
  u.label = str(j, "label");
  std::string inc = get_or<std::string>(j, "inclusion", "compulsory");
  if (inc == "compulsory" || inc == "c") u.inclusion = Inclusion::Compulsory;
  else if (inc == "optional" || inc == "o") u.inclusion = Inclusion::Optional;
  else bad("unknown inclusion '" + inc + "'");
  u.order = get_or<int>(j, "order", 0);
  u.params = params_from(j);
  u.commentary = get_or<std::string>(j, "commentary", "");
  u.keyword_suggestions = get_or<std::set<std::string>>(j, "keywords", {});
  if (auto it = j.find("children"); it != j.end()) {
    for (const auto& c : *it) u.children.push_back(unit_from(c));
  }
  if (auto it = j.find("versions"); it != j.end()) {
    for (const auto& vj : *it) {
      TextVersion v;
      v.number = field(vj, "number").get<int>();
      v.fragment = str(vj, "fragment");
      v.params = params_from(vj);
      v.commentary = get_or<std::string>(vj, "commentary", "");
      v.author = get_or<std::string>(vj, "author", "");
      if (auto c = vj.find("created"); c != vj.end()) v.created = date_from(*c);
      u.versions.push_back(std::move(v));
    }
  }
  return u;
}

// Missing order values default to position among siblings.
void default_orders(std::vector<UnitTemplate>& level) {
  for (std::size_t i = 0; i < level.size(); ++i) {
    if (level[i].order == 0) level[i].order = static_cast<int>(i) + 1;
    default_orders(level[i].children);
  }
}

json subject_json(const Subject& s) {
  if (const auto* p = std::get_if<UnitPath>(&s)) return {{"unit", to_json(*p)}};
  return {{"param", std::get<ParamName>(s).name}};
}

}  // namespace

std::string canonical(const json& j) { return j.dump(2) + "\n"; }

json to_json(const UnitPath& p) { return p.labels; }

UnitPath path_from_json(const json& j) {
  if (j.is_string()) return parse_path(j.get<std::string>());
  if (!j.is_array()) bad("a unit path must be an array of labels");
  UnitPath p;
  for (const auto& l : j) {
    if (!l.is_string()) bad("unit path labels must be strings");
    p.labels.push_back(l.get<std::string>());
  }
  return p;
}

json to_json(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::get<Date>(v).iso();
}

Value value_from_json(const json& j, ValueKind kind) {
  switch (kind) {
    case ValueKind::Integer:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      if (j.is_string())
        if (auto v = parse_value(kind, j.get<std::string>())) return *v;
      bad("expected an integer value");
    case ValueKind::Date:
      return date_from(j);
    case ValueKind::String:
      if (!j.is_string()) bad("expected a string value");
      return j.get<std::string>();
  }
  bad("bad value");
}

json to_json(const ParamSpec& s) {
  json j = {{"name", s.name}, {"kind", kind_name(s.kind)}, {"required", s.required}};
  if (s.default_value) j["default"] = to_json(*s.default_value);
  return j;
}

ParamSpec param_spec_from_json(const json& j) {
  if (j.is_string()) {
    // Shorthand: "Engineer" or "$Engineer" -> required string.
    std::string name = j.get<std::string>();
    if (!name.empty() && name.front() == '$') name.erase(0, 1);
    return {name, ValueKind::String, true, std::nullopt};
  }
  ParamSpec s;
  s.name = str(j, "name");
  s.kind = j.contains("kind") ? kind_from(j["kind"]) : ValueKind::String;
  s.required = get_or<bool>(j, "required", false);
  if (auto it = j.find("default"); it != j.end() && !it->is_null())
    s.default_value = value_from_json(*it, s.kind);
  return s;
}

json to_json(const Constraint& c) {
  return std::visit(
      [](const auto& x) -> json {
        using C = std::decay_t<decltype(x)>;
        json j;
        if constexpr (std::is_same_v<C, Forces>) {
          j["kind"] = "forces";
          if (const auto* a = std::get_if<UnitPath>(&x.antecedent)) j["from"] = to_json(*a);
          else j["if"] = print_cond(std::get<CondExpr>(x.antecedent));
          j["to"] = to_json(x.consequent);
          if (x.guard) j["when"] = print_cond(*x.guard);
        } else if constexpr (std::is_same_v<C, Incompatible> || std::is_same_v<C, ExclusiveOr>) {
          j["kind"] = std::is_same_v<C, Incompatible> ? "incompatible" : "exclusive_or";
          j["a"] = to_json(x.a);
          j["b"] = to_json(x.b);
          if (x.guard) j["when"] = print_cond(*x.guard);
        } else if constexpr (std::is_same_v<C, Refers>) {
          j["kind"] = "refers";
          j["from"] = to_json(x.from);
          j["to"] = to_json(x.to);
        } else {
          j["kind"] = "data";
          j["expr"] = print_cond(x.expr);
          j["message"] = x.message;
        }
        return j;
      },
      c);
}

Constraint constraint_from_json(const json& j) {
  std::string kind = str(j, "kind");
  if (kind == "forces") {
    Forces f;
    if (j.contains("if")) f.antecedent = parse_cond(str(j, "if"));
    else f.antecedent = path_from_json(field(j, "from"));
    f.consequent = path_from_json(field(j, "to"));
    f.guard = opt_cond(j, "when");
    return f;
  }
  if (kind == "incompatible")
    return Incompatible{path_from_json(field(j, "a")), path_from_json(field(j, "b")), opt_cond(j, "when")};
  if (kind == "exclusive_or")
    return ExclusiveOr{path_from_json(field(j, "a")), path_from_json(field(j, "b")), opt_cond(j, "when")};
  if (kind == "refers") return Refers{path_from_json(field(j, "from")), path_from_json(field(j, "to"))};
  if (kind == "data") return DataConstraint{parse_cond(str(j, "expr")), get_or<std::string>(j, "message", "")};
  bad("unknown constraint kind '" + kind + "'");
}

json to_json(const GenericDocument& g) {
  json j;
  j["schema_version"] = g.schema_version;
  j["doc_type"] = g.doc_type;
  j["category"] = g.category;
  j["params"] = params_json(g.params);
  json parts = json::array();
  for (const auto& p : g.parts) parts.push_back(unit_json(p));
  j["parts"] = parts;
  json cs = json::array();
  for (const auto& c : g.constraints) cs.push_back(to_json(c));
  j["constraints"] = cs;
  return j;
}

GenericDocument generic_from_json(const json& j) {
  GenericDocument g;
  g.schema_version = get_or<int>(j, "schema_version", 1);
  if (g.schema_version != 1) bad("unsupported schema_version " + std::to_string(g.schema_version));
  g.doc_type = str(j, "doc_type");
  g.category = get_or<std::string>(j, "category", "");
  g.params = params_from(j);
  for (const auto& p : field(j, "parts")) g.parts.push_back(unit_from(p));
  default_orders(g.parts);
  if (auto it = j.find("constraints"); it != j.end())
    for (const auto& c : *it) g.constraints.push_back(constraint_from_json(c));
  if (auto it = j.find("fragments"); it != j.end())
    for (const auto& [id, text] : it->items()) g.fragments[id] = text.get<std::string>();
  return g;
}

json bundle_to_json(const GenericDocument& g) {
  json j = to_json(g);
  j["fragments"] = g.fragments;
  return j;
}

json to_json(const Party& p) { return {{"name", p.name}, {"address", p.address}, {"extra", p.extra}}; }

Party party_from_json(const json& j) {
  Party p;
  p.name = get_or<std::string>(j, "name", "");
  p.address = get_or<std::string>(j, "address", "");
  p.extra = get_or<std::map<std::string, std::string>>(j, "extra", {});
  return p;
}

json to_json(const Tag& t) { return {{"kind", tag_kind_name(t.kind)}, {"party", t.party}, {"label", t.label}}; }

Tag tag_from_json(const json& j) {
  Tag t;
  auto k = tag_kind_from_name(str(j, "kind"));
  if (!k) bad("tag kind must be duty or right");
  t.kind = *k;
  t.party = field(j, "party").get<int>();
  t.label = get_or<std::string>(j, "label", "");
  return t;
}

json to_json(const DocumentInstance& d) {
  json j;
  j["schema_version"] = 1;
  j["doc_type"] = d.doc_type;
  j["id"] = d.id;
  j["display_name"] = d.display_name;
  j["status"] = d.status == InstanceStatus::Final ? "final" : "draft";
  j["parties"] = json::array({to_json(d.parties[0]), to_json(d.parties[1])});
  j["date"] = d.date ? json(d.date->iso()) : json(nullptr);
  json bs = json::array();
  for (const auto& b : d.bindings)
    bs.push_back({{"scope", to_json(b.scope)}, {"name", b.name}, {"kind", kind_name(kind_of(b.value))},
                  {"value", to_json(b.value)}});
  j["bindings"] = bs;
  json sel = json::array();
  for (const auto& [p, v] : d.selections) sel.push_back({{"path", to_json(p)}, {"version", v}});
  j["selections"] = sel;
  json inc = json::array();
  for (const auto& p : d.included_optional) inc.push_back(to_json(p));
  j["included_optional"] = inc;
  json ov = json::array();
  for (const auto& [p, o] : d.order_overrides) ov.push_back({{"parent", to_json(p)}, {"order", o}});
  j["order_overrides"] = ov;
  json kw = json::array();
  for (const auto& [p, k] : d.keywords) kw.push_back({{"path", to_json(p)}, {"keywords", k}});
  j["keywords"] = kw;
  json tg = json::array();
  for (const auto& [p, ts] : d.tags) {
    json a = json::array();
    for (const auto& t : ts) a.push_back(to_json(t));
    tg.push_back({{"path", to_json(p)}, {"tags", a}});
  }
  j["tags"] = tg;
  j["notes"] = d.notes;
  return j;
}

DocumentInstance instance_from_json(const json& j) {
  DocumentInstance d;
  d.doc_type = str(j, "doc_type");
  d.id = str(j, "id");
  d.display_name = get_or<std::string>(j, "display_name", "");
  std::string status = get_or<std::string>(j, "status", "draft");
  if (status != "draft" && status != "final") bad("status must be draft or final");
  d.status = status == "final" ? InstanceStatus::Final : InstanceStatus::Draft;
  if (auto it = j.find("parties"); it != j.end()) {
    if (!it->is_array() || it->size() != 2) bad("parties must be a pair");
    d.parties = {party_from_json((*it)[0]), party_from_json((*it)[1])};
  }
  if (auto it = j.find("date"); it != j.end() && !it->is_null()) d.date = date_from(*it);
  for (const auto& b : j.value("bindings", json::array())) {
    UnitPath scope = b.contains("scope") ? path_from_json(b["scope"]) : UnitPath{};
    std::string name = str(b, "name");
    if (d.find_binding(scope, name)) bad("duplicate binding for $" + name);
    d.set_binding(scope, name, value_from_json(field(b, "value"), kind_from(field(b, "kind"))));
  }
  for (const auto& s : j.value("selections", json::array()))
    d.selections[path_from_json(field(s, "path"))] = field(s, "version").get<int>();
  for (const auto& p : j.value("included_optional", json::array()))
    d.included_optional.insert(path_from_json(p));
  for (const auto& o : j.value("order_overrides", json::array()))
    d.order_overrides[path_from_json(field(o, "parent"))] = field(o, "order").get<std::vector<std::string>>();
  for (const auto& k : j.value("keywords", json::array()))
    d.keywords[path_from_json(field(k, "path"))] = field(k, "keywords").get<std::set<std::string>>();
  for (const auto& t : j.value("tags", json::array())) {
    std::set<Tag> tags;
    for (const auto& x : field(t, "tags")) tags.insert(tag_from_json(x));
    d.tags[path_from_json(field(t, "path"))] = tags;
  }
  d.notes = get_or<std::string>(j, "notes", "");
  return d;
}

json to_json(const Violation& v) {
  json subjects = json::array();
  for (const auto& s : v.subjects) subjects.push_back(subject_json(s));
  return {{"kind", violation_kind_name(v.kind)},
          {"subjects", subjects},
          {"source", v.source ? json(*v.source) : json(nullptr)},
          {"message", v.message},
          {"pending", v.pending}};
}

Violation violation_from_json(const json& j) {
  Violation v;
  auto k = violation_kind_from_name(str(j, "kind"));
  if (!k) bad("unknown violation kind");
  v.kind = *k;
  for (const auto& s : field(j, "subjects")) {
    if (s.contains("unit")) v.subjects.push_back(path_from_json(s["unit"]));
    else v.subjects.push_back(ParamName{str(s, "param")});
  }
  if (auto it = j.find("source"); it != j.end() && !it->is_null()) v.source = it->get<std::size_t>();
  v.message = get_or<std::string>(j, "message", "");
  v.pending = get_or<bool>(j, "pending", false);
  return v;
}

json to_json(const std::vector<Violation>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

json to_json(const Remedy& r) {
  json j = {{"action", remedy_action_name(r.action)}, {"rationale", r.rationale}};
  if (const auto* p = std::get_if<UnitPath>(&r.target)) j["path"] = to_json(*p);
  else j["name"] = std::get<ParamName>(r.target).name;
  return j;
}

json to_json(const Edit& e) {
  return std::visit(
      [](const auto& x) -> json {
        using E = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<E, edit::SetParties>) {
          return {{"type", "set_parties"}, {"party1", to_json(x.first)}, {"party2", to_json(x.second)}};
        } else if constexpr (std::is_same_v<E, edit::SetDate>) {
          return {{"type", "set_date"}, {"date", x.date.iso()}};
        } else if constexpr (std::is_same_v<E, edit::SetParam>) {
          return {{"type", "set_param"}, {"scope", to_json(x.scope)}, {"name", x.name},
                  {"kind", kind_name(kind_of(x.value))}, {"value", to_json(x.value)}};
        } else if constexpr (std::is_same_v<E, edit::IncludeUnit>) {
          return {{"type", "include_unit"}, {"path", to_json(x.path)}};
        } else if constexpr (std::is_same_v<E, edit::ExcludeUnit>) {
          return {{"type", "exclude_unit"}, {"path", to_json(x.path)}};
        } else if constexpr (std::is_same_v<E, edit::ChooseVersion>) {
          return {{"type", "choose_version"}, {"path", to_json(x.path)}, {"version", x.version}};
        } else if constexpr (std::is_same_v<E, edit::CreateVersion>) {
          json j = {{"type", "create_version"}, {"path", to_json(x.path)}, {"text", x.text},
                    {"params", params_json(x.params)}, {"commentary", x.commentary},
                    {"author", x.author}};
          if (x.assigned) j["assigned_version"] = *x.assigned;
          return j;
        } else if constexpr (std::is_same_v<E, edit::Reorder>) {
          return {{"type", "reorder"}, {"parent", to_json(x.parent)}, {"order", x.order}};
        } else if constexpr (std::is_same_v<E, edit::SetKeywords>) {
          return {{"type", "set_keywords"}, {"path", to_json(x.path)}, {"keywords", x.keywords}};
        } else if constexpr (std::is_same_v<E, edit::SetTags>) {
          json a = json::array();
          for (const auto& t : x.tags) a.push_back(to_json(t));
          return {{"type", "set_tags"}, {"path", to_json(x.path)}, {"tags", a}};
        } else if constexpr (std::is_same_v<E, edit::SetNotes>) {
          return {{"type", "set_notes"}, {"text", x.text}};
        } else if constexpr (std::is_same_v<E, edit::ToggleAutocheck>) {
          return {{"type", "toggle_autocheck"}, {"on", x.on}};
        } else if constexpr (std::is_same_v<E, edit::SetDisplayName>) {
          return {{"type", "set_display_name"}, {"name", x.name}};
        } else {
          return {{"type", "set_stage"}, {"stage", stage_name(x.stage)}};
        }
      },
      e);
}

Edit edit_from_json(const json& j, const GenericDocument* g) {
  std::string type = str(j, "type");
  if (type == "set_parties")
    return edit::SetParties{party_from_json(field(j, "party1")), party_from_json(field(j, "party2"))};
  if (type == "set_date") return edit::SetDate{date_from(field(j, "date"))};
  if (type == "set_param") {
    edit::SetParam e;
    e.scope = j.contains("scope") && !j["scope"].is_null() ? path_from_json(j["scope"]) : UnitPath{};
    e.name = str(j, "name");
    const json& raw = field(j, "value");
    ValueKind kind = raw.is_number_integer() ? ValueKind::Integer : ValueKind::String;
    if (j.contains("kind")) kind = kind_from(j["kind"]);
    else if (g)
      if (const ParamSpec* s = governing_spec(*g, e.scope, e.name)) kind = s->kind;
    e.value = value_from_json(raw, kind);
    return e;
  }
  if (type == "include_unit") return edit::IncludeUnit{path_from_json(field(j, "path"))};
  if (type == "exclude_unit") return edit::ExcludeUnit{path_from_json(field(j, "path"))};
  if (type == "choose_version")
    return edit::ChooseVersion{path_from_json(field(j, "path")), field(j, "version").get<int>()};
  if (type == "create_version") {
    edit::CreateVersion e;
    e.path = path_from_json(field(j, "path"));
    e.text = str(j, "text");
    e.params = params_from(j);
    e.commentary = get_or<std::string>(j, "commentary", "");
    e.author = get_or<std::string>(j, "author", "");
    if (auto it = j.find("assigned_version"); it != j.end() && !it->is_null()) e.assigned = it->get<int>();
    return e;
  }
  if (type == "reorder")
    return edit::Reorder{j.contains("parent") ? path_from_json(j["parent"]) : UnitPath{},
                         field(j, "order").get<std::vector<std::string>>()};
  if (type == "set_keywords")
    return edit::SetKeywords{path_from_json(field(j, "path")), field(j, "keywords").get<std::set<std::string>>()};
  if (type == "set_tags") {
    edit::SetTags e{path_from_json(field(j, "path")), {}};
    for (const auto& t : field(j, "tags")) e.tags.insert(tag_from_json(t));
    return e;
  }
  if (type == "set_notes") return edit::SetNotes{str(j, "text")};
  if (type == "toggle_autocheck") return edit::ToggleAutocheck{field(j, "on").get<bool>()};
  if (type == "set_display_name") return edit::SetDisplayName{str(j, "name")};
  if (type == "set_stage") {
    auto s = stage_from_name(str(j, "stage"));
    if (!s) bad("unknown stage");
    return edit::SetStage{*s};
  }
  bad("unknown edit type '" + type + "'");
}

json to_json(const Session& s) {
  json log = json::array();
  for (const auto& e : s.edit_log) log.push_back({{"timestamp", e.timestamp}, {"edit", to_json(e.edit)}});
  return {{"schema_version", 1},
          {"session_id", s.session_id},
          {"doc_type", s.doc_type},
          {"stage", stage_name(s.stage)},
          {"autocheck", s.autocheck},
          {"cursor", s.cursor ? to_json(*s.cursor) : json(nullptr)},
          {"draft", to_json(s.draft)},
          {"edit_log", log}};
}

Session session_from_json(const json& j) {
  Session s;
  s.session_id = str(j, "session_id");
  s.doc_type = str(j, "doc_type");
  auto st = stage_from_name(str(j, "stage"));
  if (!st) bad("unknown stage");
  s.stage = *st;
  s.autocheck = get_or<bool>(j, "autocheck", false);
  if (auto it = j.find("cursor"); it != j.end() && !it->is_null()) s.cursor = path_from_json(*it);
  s.draft = instance_from_json(field(j, "draft"));
  for (const auto& e : j.value("edit_log", json::array()))
    s.edit_log.push_back({str(e, "timestamp"), edit_from_json(field(e, "edit"))});
  return s;
}

}  // namespace clause
