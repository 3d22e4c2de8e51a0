#pragma once

// JSON forms of the engine's records. These are the store's on-disk
// schemas (schema_version 1) and the HTTP bodies.

#include "json.hpp"

#include "clause/constraints.hpp"
#include "clause/document.hpp"
#include "clause/session.hpp"

namespace clause {

using nlohmann::json;

json to_json(const UnitPath& p);
UnitPath path_from_json(const json& j);

json to_json(const Value& v);
// `kind` decides how strings are read ("1994-05-03" as a date, ...).
Value value_from_json(const json& j, ValueKind kind);

json to_json(const ParamSpec& s);
ParamSpec param_spec_from_json(const json& j);

json to_json(const Constraint& c);
Constraint constraint_from_json(const json& j);

// Without fragment texts; see bundle_to_json for the self-contained form.
json to_json(const GenericDocument& g);
GenericDocument generic_from_json(const json& j);

// Generic plus an inline "fragments" object (id -> text).
json bundle_to_json(const GenericDocument& g);

json to_json(const Party& p);
Party party_from_json(const json& j);

json to_json(const Tag& t);
Tag tag_from_json(const json& j);

json to_json(const DocumentInstance& d);
DocumentInstance instance_from_json(const json& j);

json to_json(const Violation& v);
Violation violation_from_json(const json& j);
json to_json(const std::vector<Violation>& vs);

json to_json(const Remedy& r);

json to_json(const Edit& e);
// Strings given for integer/date parameters are converted using the
// governing ParamSpec when `g` is supplied.
Edit edit_from_json(const json& j, const GenericDocument* g = nullptr);

json to_json(const Session& s);
Session session_from_json(const json& j);

// Canonical text: sorted keys, two-space indent, trailing newline.
std::string canonical(const json& j);

}  // namespace clause
