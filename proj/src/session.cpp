#include "clause/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "clause/error.hpp"

namespace clause {

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Meta: return "meta";
    case Stage::Compulsory: return "compulsory";
    case Stage::Optional: return "optional";
    case Stage::Review: return "review";
    case Stage::Finalized: return "finalized";
  }
  return "meta";
}

std::optional<Stage> stage_from_name(std::string_view name) {
  for (auto s : {Stage::Meta, Stage::Compulsory, Stage::Optional, Stage::Review, Stage::Finalized})
    if (stage_name(s) == name) return s;
  return std::nullopt;
}

std::string now_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

namespace {

[[noreturn]] void reject(const std::string& why) { throw Error(ErrorCode::EditRejected, why); }

const UnitTemplate& unit_or_reject(const GenericDocument& g, const UnitPath& p) {
  const UnitTemplate* u = find_unit(g, p);
  if (!u) reject("no unit at path '" + p.str() + "'");
  return *u;
}

void choose(const GenericDocument& g, DocumentInstance& d, const UnitPath& p, int version) {
  const UnitTemplate& u = unit_or_reject(g, p);
  if (!u.atomic()) reject("'" + p.str() + "' is not an atomic unit");
  if (!u.find_version(version))
    reject("'" + p.str() + "' has no version " + std::to_string(version));
  include_unit(g, d, p);
  d.selections[p] = version;
}

// Draft-level effect of an edit; session-level edits are no-ops here.
void apply_to_draft(const GenericDocument& g, DocumentInstance& d, const Edit& e) {
  std::visit(
      [&](const auto& x) {
        using E = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<E, edit::SetParties>) {
          d.parties = {x.first, x.second};
        } else if constexpr (std::is_same_v<E, edit::SetDate>) {
          d.date = x.date;
        } else if constexpr (std::is_same_v<E, edit::SetParam>) {
          if (!x.scope.empty()) unit_or_reject(g, x.scope);
          if (!is_identifier(x.name)) reject("invalid parameter name '" + x.name + "'");
          if (const ParamSpec* spec = governing_spec(g, x.scope, x.name); spec && spec->kind != kind_of(x.value))
            reject("$" + x.name + " takes a " + std::string(kind_name(spec->kind)) + ", not a " +
                   std::string(kind_name(kind_of(x.value))));
          d.set_binding(x.scope, x.name, x.value);
        } else if constexpr (std::is_same_v<E, edit::IncludeUnit>) {
          unit_or_reject(g, x.path);
          include_unit(g, d, x.path);
        } else if constexpr (std::is_same_v<E, edit::ExcludeUnit>) {
          unit_or_reject(g, x.path);
          exclude_unit(g, d, x.path);
        } else if constexpr (std::is_same_v<E, edit::ChooseVersion>) {
          choose(g, d, x.path, x.version);
        } else if constexpr (std::is_same_v<E, edit::CreateVersion>) {
          if (!x.assigned) reject("new versions must be created through the store");
          choose(g, d, x.path, *x.assigned);
        } else if constexpr (std::is_same_v<E, edit::Reorder>) {
          const auto& kids = x.parent.empty() ? g.parts : unit_or_reject(g, x.parent).children;
          std::vector<std::string> want = x.order;
          std::vector<std::string> have;
          for (const auto& k : kids) have.push_back(k.label);
          std::sort(want.begin(), want.end());
          std::sort(have.begin(), have.end());
          if (want != have) reject("reorder of '" + x.parent.str() + "' is not a permutation of its children");
          d.order_overrides[x.parent] = x.order;
        } else if constexpr (std::is_same_v<E, edit::SetKeywords>) {
          unit_or_reject(g, x.path);
          if (x.keywords.empty()) d.keywords.erase(x.path);
          else d.keywords[x.path] = x.keywords;
        } else if constexpr (std::is_same_v<E, edit::SetTags>) {
          unit_or_reject(g, x.path);
          for (const auto& t : x.tags)
            if (t.party != 1 && t.party != 2) reject("tag party must be 1 or 2");
          if (x.tags.empty()) d.tags.erase(x.path);
          else d.tags[x.path] = x.tags;
        } else if constexpr (std::is_same_v<E, edit::SetNotes>) {
          d.notes = x.text;
        } else if constexpr (std::is_same_v<E, edit::SetDisplayName>) {
          d.display_name = x.name;
        }
      },
      e);
}

std::optional<UnitPath> next_cursor(const GenericDocument& g, const DocumentInstance& d,
                                    const std::optional<UnitPath>& after) {
  bool passed = !after.has_value();
  for (const auto& p : atomic_units(g)) {
    if (!passed) {
      if (p == *after) passed = true;
      continue;
    }
    if (is_included(g, d, p)) return p;
  }
  return std::nullopt;
}

}  // namespace

const ParamSpec* governing_spec(const GenericDocument& g, const UnitPath& scope, std::string_view name) {
  auto in = [&](const std::vector<ParamSpec>& specs) -> const ParamSpec* {
    for (const auto& s : specs)
      if (s.name == name) return &s;
    return nullptr;
  };
  if (scope.empty()) return in(g.params);
  const UnitTemplate* u = find_unit(g, scope);
  if (!u) return nullptr;
  if (const ParamSpec* s = in(u->params)) return s;
  for (const auto& v : u->versions)
    if (const ParamSpec* s = in(v.params)) return s;
  return nullptr;
}

Session new_session(const GenericDocument& g, std::string session_id, std::string instance_id) {
  Session s;
  s.session_id = std::move(session_id);
  s.doc_type = g.doc_type;
  s.stage = Stage::Meta;
  s.draft = new_draft(g, std::move(instance_id));
  s.autocheck = false;
  s.cursor = next_cursor(g, s.draft, std::nullopt);
  return s;
}

EditOutcome apply_edit(const GenericDocument& g, Session s, const Edit& e, std::string timestamp) {
  if (s.stage == Stage::Finalized) reject("session is finalized");
  if (g.doc_type != s.doc_type) reject("generic '" + g.doc_type + "' does not match the session");

  if (const auto* t = std::get_if<edit::ToggleAutocheck>(&e)) {
    s.autocheck = t->on;
  } else if (const auto* st = std::get_if<edit::SetStage>(&e)) {
    if (st->stage == Stage::Finalized) reject("use finalize to complete a session");
    if (static_cast<int>(st->stage) > static_cast<int>(s.stage) + 1)
      reject("cannot skip from " + std::string(stage_name(s.stage)) + " to " +
             std::string(stage_name(st->stage)));
    s.stage = st->stage;
  } else {
    apply_to_draft(g, s.draft, e);
  }

  std::visit(
      [&](const auto& x) {
        using E = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<E, edit::IncludeUnit> || std::is_same_v<E, edit::ChooseVersion> ||
                      std::is_same_v<E, edit::CreateVersion>) {
          if (resolve_unit(g, x.path).atomic()) s.cursor = next_cursor(g, s.draft, x.path);
        } else if constexpr (std::is_same_v<E, edit::ExcludeUnit>) {
          if (s.cursor && x.path.is_prefix_of(*s.cursor)) s.cursor = next_cursor(g, s.draft, s.cursor);
        }
      },
      e);

  s.edit_log.push_back({std::move(timestamp), e});
  EditOutcome out{std::move(s), {}};
  if (out.session.autocheck) out.violations = check(g, out.session.draft, CheckStage::Interactive);
  return out;
}

DocumentInstance replay(const GenericDocument& g, const Session& s) {
  DocumentInstance d = new_draft(g, s.draft.id);
  for (const auto& logged : s.edit_log) apply_to_draft(g, d, logged.edit);
  if (s.stage == Stage::Finalized) d.status = InstanceStatus::Final;
  return d;
}

std::vector<Violation> check_session(const GenericDocument& g, const Session& s) {
  return check(g, s.draft, CheckStage::Interactive);
}

DocumentInstance finalize_session(const GenericDocument& g, Session& s) {
  if (s.stage == Stage::Finalized) reject("session is already finalized");
  if (s.stage != Stage::Review) reject("finalize requires the review stage");
  auto violations = check(g, s.draft, CheckStage::Finalize);
  if (!violations.empty()) throw ViolationsOutstanding(std::move(violations));
  s.draft.status = InstanceStatus::Final;
  s.stage = Stage::Finalized;
  return s.draft;
}

}  // namespace clause
