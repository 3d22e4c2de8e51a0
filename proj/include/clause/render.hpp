#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clause/document.hpp"

namespace clause {

struct TocEntry {
  std::string number;  // "4", "4-1", "4-1-2"
  UnitPath path;
  std::string label;

  bool operator==(const TocEntry&) const = default;
};

struct RenderedDocument {
  std::string text;
  std::vector<TocEntry> toc;
  std::vector<std::string> warnings;
};

// Single-pass `$name` substitution; `$$` emits `$`. Substituted values are
// never re-scanned. Throws Error(UnboundPlaceholder) listing every name
// that has no value.
std::string substitute(std::string_view fragment, const Env& env);

// Names substitute() would reject, in order of first appearance.
std::vector<std::string> unbound_placeholders(std::string_view fragment, const Env& env);

RenderedDocument render_document(const GenericDocument& g, const DocumentInstance& inst);

// Nested-tag export (XML syntax): document > part > unit, with link
// elements for cross-references between included units.
std::string export_markup(const GenericDocument& g, const DocumentInstance& inst);

}  // namespace clause
