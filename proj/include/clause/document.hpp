#pragma once

#include <array>
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "clause/condexpr.hpp"
#include "clause/value.hpp"

namespace clause {

// Address of a unit: labels from the root part downwards. The empty path
// stands for the document itself (document-scoped bindings, the list of
// parts as a reorder target).
struct UnitPath {
  std::vector<std::string> labels;

  UnitPath() = default;
  UnitPath(std::initializer_list<std::string> l) : labels(l) {}
  explicit UnitPath(std::vector<std::string> l) : labels(std::move(l)) {}

  bool empty() const { return labels.empty(); }
  std::size_t depth() const { return labels.size(); }
  UnitPath parent() const;
  UnitPath child(std::string label) const;
  // True when *this is a proper or improper prefix of `other`.
  bool is_prefix_of(const UnitPath& other) const;
  std::string str() const;  // labels joined with '/'

  auto operator<=>(const UnitPath&) const = default;
  bool operator==(const UnitPath&) const = default;
};

// "Time for Completion/Extension of Time for Completion"
UnitPath parse_path(std::string_view text);

enum class Inclusion { Compulsory, Optional };

struct ParamSpec {
  std::string name;
  ValueKind kind = ValueKind::String;
  bool required = false;
  // A value carried by the generic itself, e.g. a version written with
  // `$days` defaulting to 30.
  std::optional<Value> default_value;

  bool operator==(const ParamSpec&) const = default;
};

struct ParamBinding {
  UnitPath scope;  // empty: document scope
  std::string name;
  Value value;

  bool operator==(const ParamBinding&) const = default;
};

struct TextVersion {
  int number = 1;
  std::string fragment;  // fragment id inside the generic's fragment store
  std::vector<ParamSpec> params;
  std::string commentary;
  std::string author;
  Date created;

  bool operator==(const TextVersion&) const = default;
};

struct UnitTemplate {
  std::string label;
  Inclusion inclusion = Inclusion::Compulsory;
  int order = 1;
  std::vector<ParamSpec> params;
  std::vector<UnitTemplate> children;
  std::vector<TextVersion> versions;
  std::string commentary;
  std::set<std::string> keyword_suggestions;

  bool atomic() const { return !versions.empty(); }
  bool compulsory() const { return inclusion == Inclusion::Compulsory; }
  const TextVersion* find_version(int number) const;
  int max_version() const;

  bool operator==(const UnitTemplate&) const = default;
};

struct Forces {
  std::variant<UnitPath, CondExpr> antecedent;
  UnitPath consequent;
  std::optional<CondExpr> guard;
  bool operator==(const Forces&) const = default;
};

struct Incompatible {
  UnitPath a;
  UnitPath b;
  std::optional<CondExpr> guard;
  bool operator==(const Incompatible&) const = default;
};

struct ExclusiveOr {
  UnitPath a;
  UnitPath b;
  std::optional<CondExpr> guard;
  bool operator==(const ExclusiveOr&) const = default;
};

struct Refers {
  UnitPath from;
  UnitPath to;
  bool operator==(const Refers&) const = default;
};

struct DataConstraint {
  CondExpr expr;
  std::string message;
  bool operator==(const DataConstraint&) const = default;
};

using Constraint = std::variant<Forces, Incompatible, ExclusiveOr, Refers, DataConstraint>;

struct GenericDocument {
  std::string doc_type;
  std::string category;
  std::vector<ParamSpec> params;
  std::vector<UnitTemplate> parts;
  std::vector<Constraint> constraints;
  int schema_version = 1;
  // fragment id -> text. Persisted as separate files by the store; a
  // missing entry means the fragment could not be read.
  std::map<std::string, std::string> fragments;

  bool operator==(const GenericDocument&) const = default;
};

struct Party {
  std::string name;
  std::string address;
  std::map<std::string, std::string> extra;

  bool operator==(const Party&) const = default;
};

enum class TagKind { Duty, Right };

// Duty/right index entry. Carries no semantics beyond retrieval.
struct Tag {
  TagKind kind = TagKind::Duty;
  int party = 1;  // 1 or 2
  std::string label;

  auto operator<=>(const Tag&) const = default;
  bool operator==(const Tag&) const = default;
};

enum class InstanceStatus { Draft, Final };

struct DocumentInstance {
  std::string doc_type;
  std::string id;
  std::string display_name;
  std::array<Party, 2> parties;
  std::optional<Date> date;
  std::vector<ParamBinding> bindings;
  std::map<UnitPath, int> selections;  // atomic unit -> chosen version
  std::set<UnitPath> included_optional;
  std::map<UnitPath, std::vector<std::string>> order_overrides;  // parent -> child labels
  std::map<UnitPath, std::set<std::string>> keywords;
  std::map<UnitPath, std::set<Tag>> tags;
  std::string notes;
  InstanceStatus status = InstanceStatus::Draft;

  const Value* find_binding(const UnitPath& scope, std::string_view name) const;
  void set_binding(UnitPath scope, std::string name, Value value);

  bool operator==(const DocumentInstance&) const = default;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

ValidationReport validate_generic(const GenericDocument& g);

// Throws Error(NotFound) when any label fails to match.
const UnitTemplate& resolve_unit(const GenericDocument& g, const UnitPath& p);
const UnitTemplate* find_unit(const GenericDocument& g, const UnitPath& p);

// Siblings in effective order: by `order`, or by the instance's override
// for that parent when one is given.
std::vector<const UnitTemplate*> ordered(const std::vector<UnitTemplate>& siblings,
                                         const std::vector<std::string>* override_labels = nullptr);

const std::vector<UnitTemplate>& children_of(const GenericDocument& g, const UnitPath& parent);

// Pre-order walk honoring sibling order.
void for_each_unit(const GenericDocument& g,
                   const std::function<void(const UnitPath&, const UnitTemplate&)>& fn);

std::vector<UnitPath> atomic_units(const GenericDocument& g,
                                   const std::optional<UnitPath>& within = std::nullopt);

struct NewVersion {
  std::string text;
  std::vector<ParamSpec> params;
  std::string commentary;
  std::string author;
  Date created;
};

// Appends a version (max + 1) to the atomic unit at `p`. Existing versions
// and fragments are untouched.
std::pair<GenericDocument, int> add_version(GenericDocument g, const UnitPath& p, NewVersion v);

// Reserved names always available to conditions and fragments.
inline constexpr std::array<std::string_view, 5> kBuiltinNames = {
    "Party1.Name", "Party1.Address", "Party2.Name", "Party2.Address", "Date"};

// Name -> value visible to the fragment of (p, v). Instance bindings win,
// nearest scope first (p up to its root part, then the document); generic
// defaults fill the rest in the same order starting from the version; the
// built-ins come last.
Env effective_bindings(const GenericDocument& g, const DocumentInstance& inst, const UnitPath& p,
                       int version);

// Document-level view used by conditions: document params and built-ins.
Env document_env(const GenericDocument& g, const DocumentInstance& inst);

// --- inclusion -------------------------------------------------------------

// A unit is included when every non-atomic optional unit on the way down is
// in included_optional and, for an atomic unit, a version is selected.
bool is_included(const GenericDocument& g, const DocumentInstance& inst, const UnitPath& p);

// Selects the lowest version of every included compulsory atomic unit that
// has no selection yet.
void fill_compulsory(const GenericDocument& g, DocumentInstance& inst);

// Includes p, its optional ancestors, and the compulsory descendants that
// come with them.
void include_unit(const GenericDocument& g, DocumentInstance& inst, const UnitPath& p);

// Removes p and every descendant. Compulsory units cannot be excluded.
void exclude_unit(const GenericDocument& g, DocumentInstance& inst, const UnitPath& p);

DocumentInstance new_draft(const GenericDocument& g, std::string id);

std::string slugify(std::string_view text);

std::string_view tag_kind_name(TagKind k);
std::optional<TagKind> tag_kind_from_name(std::string_view name);

}  // namespace clause
