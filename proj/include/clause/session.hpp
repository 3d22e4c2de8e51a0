#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "clause/constraints.hpp"
#include "clause/document.hpp"

namespace clause {

// Advisory drafting stages; only `Finalized` is terminal.
enum class Stage { Meta, Compulsory, Optional, Review, Finalized };

std::string_view stage_name(Stage s);
std::optional<Stage> stage_from_name(std::string_view name);

namespace edit {

struct SetParties {
  Party first;
  Party second;
  bool operator==(const SetParties&) const = default;
};
struct SetDate {
  Date date;
  bool operator==(const SetDate&) const = default;
};
struct SetParam {
  UnitPath scope;  // empty: document
  std::string name;
  Value value;
  bool operator==(const SetParam&) const = default;
};
struct IncludeUnit {
  UnitPath path;
  bool operator==(const IncludeUnit&) const = default;
};
struct ExcludeUnit {
  UnitPath path;
  bool operator==(const ExcludeUnit&) const = default;
};
struct ChooseVersion {
  UnitPath path;
  int version = 1;
  bool operator==(const ChooseVersion&) const = default;
};
struct CreateVersion {
  UnitPath path;
  std::string text;
  std::vector<ParamSpec> params;
  std::string commentary;
  std::string author;
  // Number the store handed out; recorded in the log so replay selects it
  // instead of appending again.
  std::optional<int> assigned;
  bool operator==(const CreateVersion&) const = default;
};
struct Reorder {
  UnitPath parent;  // empty: the list of parts
  std::vector<std::string> order;
  bool operator==(const Reorder&) const = default;
};
struct SetKeywords {
  UnitPath path;
  std::set<std::string> keywords;
  bool operator==(const SetKeywords&) const = default;
};
struct SetTags {
  UnitPath path;
  std::set<Tag> tags;
  bool operator==(const SetTags&) const = default;
};
struct SetNotes {
  std::string text;
  bool operator==(const SetNotes&) const = default;
};
struct ToggleAutocheck {
  bool on = false;
  bool operator==(const ToggleAutocheck&) const = default;
};
struct SetDisplayName {
  std::string name;
  bool operator==(const SetDisplayName&) const = default;
};
struct SetStage {
  Stage stage = Stage::Meta;
  bool operator==(const SetStage&) const = default;
};

}  // namespace edit

using Edit = std::variant<edit::SetParties, edit::SetDate, edit::SetParam, edit::IncludeUnit,
                          edit::ExcludeUnit, edit::ChooseVersion, edit::CreateVersion,
                          edit::Reorder, edit::SetKeywords, edit::SetTags, edit::SetNotes,
                          edit::ToggleAutocheck, edit::SetDisplayName, edit::SetStage>;

struct LoggedEdit {
  std::string timestamp;
  Edit edit;
  bool operator==(const LoggedEdit&) const = default;
};

struct Session {
  std::string session_id;
  std::string doc_type;
  Stage stage = Stage::Meta;
  DocumentInstance draft;
  bool autocheck = false;
  std::vector<LoggedEdit> edit_log;
  std::optional<UnitPath> cursor;  // next atomic unit to walk through

  bool operator==(const Session&) const = default;
};

struct EditOutcome {
  Session session;
  std::vector<Violation> violations;
};

// Fresh session: every compulsory atomic unit at its lowest version,
// keywords seeded from the generic's suggestions, autocheck off.
Session new_session(const GenericDocument& g, std::string session_id, std::string instance_id);

// The ParamSpec that decides the kind of a binding at `scope`, if any.
const ParamSpec* governing_spec(const GenericDocument& g, const UnitPath& scope,
                                std::string_view name);

// Applies one edit and logs it. A CreateVersion must already carry the
// number `g` holds the new text under. Throws Error(EditRejected).
EditOutcome apply_edit(const GenericDocument& g, Session s, const Edit& e, std::string timestamp);

// Rebuilds the draft from the session's edit log.
DocumentInstance replay(const GenericDocument& g, const Session& s);

std::vector<Violation> check_session(const GenericDocument& g, const Session& s);

// On a clean finalize check: marks the draft final, moves the session to
// Finalized and returns the instance. Throws ViolationsOutstanding.
DocumentInstance finalize_session(const GenericDocument& g, Session& s);

std::string now_timestamp();

}  // namespace clause
