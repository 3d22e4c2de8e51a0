#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "clause/render.hpp"
#include "clause/store.hpp"

namespace clause {

enum class DateRel { On, Before, After };

// A calendar span given at year, month or day precision.
struct DateSpan {
  Date first;
  Date last;
  bool operator==(const DateSpan&) const = default;
};

// "1994", "1994-12" or "1994-12-15". Throws BadFilter.
DateSpan parse_date_span(std::string_view text);

struct PartyPattern {
  std::string pattern;       // case-insensitive substring
  std::optional<int> party;  // 1 or 2; either party when empty
  bool operator==(const PartyPattern&) const = default;
};

struct TagFilter {
  TagKind kind = TagKind::Duty;
  std::optional<int> party;
  std::optional<std::string> label;
  bool operator==(const TagFilter&) const = default;
};

struct QueryFilter {
  std::optional<std::string> doc_type;
  std::optional<std::string> category;
  std::optional<std::pair<DateRel, DateSpan>> date_rel;
  std::optional<PartyPattern> party_name;
  std::optional<PartyPattern> party_address;
  std::set<std::string> keywords;
  std::vector<std::pair<UnitPath, int>> contains_version;
  std::optional<TagFilter> tag;

  bool operator==(const QueryFilter&) const = default;
};

// Builds a filter from surface parameters: doc_type, category, on, before,
// after, party_name, party_address, party (1|2, pins both patterns),
// keyword (repeatable), contains ("Path@N", repeatable), tag
// ("duty|right[:party[:label]]"). Other keys may appear once. Throws
// BadFilter.
QueryFilter parse_filter(const std::vector<std::pair<std::string, std::string>>& params);

bool matches(const QueryFilter& f, const GenericDocument* g, const DocumentInstance& inst);

// Matching instances ordered by date (undated last), then id.
std::vector<InstanceSummary> run_query(const Store& store, const QueryFilter& f);

// render_document over the stored instance. Throws UnknownInstance.
RenderedDocument expand(const Store& store, std::string_view id);

}  // namespace clause
