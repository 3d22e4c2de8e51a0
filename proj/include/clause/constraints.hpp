#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "clause/document.hpp"
#include "clause/error.hpp"

namespace clause {

enum class ViolationKind {
  MissingCompulsory,
  ForcesUnsatisfied,
  IncompatiblePair,
  ExclusiveOrUnsatisfied,
  DanglingReference,
  DataViolation,
  MissingParameter,
};

std::string_view violation_kind_name(ViolationKind k);
std::optional<ViolationKind> violation_kind_from_name(std::string_view name);

struct ParamName {
  std::string name;
  auto operator<=>(const ParamName&) const = default;
  bool operator==(const ParamName&) const = default;
};

using Subject = std::variant<UnitPath, ParamName>;

struct Violation {
  ViolationKind kind;
  std::vector<Subject> subjects;
  // Index into GenericDocument::constraints; empty for compulsory flags and
  // missing parameters.
  std::optional<std::size_t> source;
  std::string message;
  bool pending = false;

  bool operator==(const Violation&) const = default;
};

enum class CheckStage { Interactive, Finalize };

struct Remedy {
  enum class Action { Include, Exclude, SetParameter };
  Action action;
  std::variant<UnitPath, ParamName> target;
  std::string rationale;

  bool operator==(const Remedy&) const = default;
};

std::string_view remedy_action_name(Remedy::Action a);

// Least fixpoint of compulsory parts, compulsory children of included or
// required units, parents of required units, Forces and Refers. Unknown
// guards contribute nothing.
std::set<UnitPath> required_units(const GenericDocument& g, const DocumentInstance& inst);

// Violations in deterministic order: compulsory flags in tree order, then
// constraints in declaration order, then (at finalize) missing parameters.
std::vector<Violation> check(const GenericDocument& g, const DocumentInstance& inst, CheckStage stage);

std::vector<Remedy> suggest_remedies(const Violation& v, const GenericDocument& g,
                                     const DocumentInstance& inst);

// Applies an Include/Exclude remedy; SetParameter needs a value and is left
// to the caller.
void apply_remedy(const Remedy& r, const GenericDocument& g, DocumentInstance& inst);

// Advisory Refers suggestions from "Clause N", "Sub-Clause N-M" and
// "Section N-M" mentions in fragment text. Throws FragmentUnreadable.
std::vector<Refers> scan_cross_references(const GenericDocument& g);

// Derived section numbers over the whole generic ("4", "4-1", ...).
std::map<UnitPath, std::string> generic_numbering(const GenericDocument& g);

std::string describe(const Subject& s);

}  // namespace clause

namespace clause {

// Raised by finalize; carries the full list, pending items included.
class ViolationsOutstanding : public Error {
 public:
  explicit ViolationsOutstanding(std::vector<Violation> v)
      : Error(ErrorCode::ViolationsOutstanding,
              std::to_string(v.size()) + " violation(s) outstanding"),
        violations_(std::move(v)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace clause
