#include "clause/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace clause {

namespace {

[[noreturn]] void bad(const std::string& why) { throw Error(ErrorCode::BadFilter, why); }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains_ci(std::string_view hay, std::string_view needle) {
  return lower(hay).find(lower(needle)) != std::string::npos;
}

int parse_int(std::string_view text, const std::string& what) {
  if (text.empty() || text.size() > 9) bad("malformed " + what + " '" + std::string(text) + "'");
  int n = 0;
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) bad("malformed " + what + " '" + std::string(text) + "'");
    n = n * 10 + (c - '0');
  }
  return n;
}

int parse_party_index(std::string_view text) {
  if (text == "1") return 1;
  if (text == "2") return 2;
  bad("party index must be 1 or 2, got '" + std::string(text) + "'");
}

bool party_matches(const PartyPattern& p, const DocumentInstance& inst, bool address) {
  for (int i = 1; i <= 2; ++i) {
    if (p.party && *p.party != i) continue;
    const Party& party = inst.parties[i - 1];
    if (contains_ci(address ? party.address : party.name, p.pattern)) return true;
  }
  return false;
}

}  // namespace

DateSpan parse_date_span(std::string_view text) {
  std::string t(text);
  if (t.size() == 4) {
    int y = parse_int(t, "date");
    return {Date{y, 1, 1}, Date{y, 12, 31}};
  }
  if (t.size() == 7 && t[4] == '-') {
    int y = parse_int(t.substr(0, 4), "date");
    int m = parse_int(t.substr(5, 2), "date");
    if (m < 1 || m > 12) bad("malformed date '" + t + "'");
    return {Date{y, m, 1}, Date{y, m, Date::days_in_month(y, m)}};
  }
  auto d = Date::parse_iso(t);
  if (!d) bad("malformed date '" + t + "'");
  return {*d, *d};
}

QueryFilter parse_filter(const std::vector<std::pair<std::string, std::string>>& params) {
  QueryFilter f;
  std::optional<int> pinned;
  auto set_date = [&](DateRel rel, const std::string& v) {
    if (f.date_rel) bad("only one of on, before, after may be given");
    f.date_rel = std::make_pair(rel, parse_date_span(v));
  };
  std::set<std::string> seen;
  for (const auto& [key, value] : params) {
    if (key != "keyword" && key != "contains" && !seen.insert(key).second)
      bad("filter parameter '" + key + "' given twice");
    if (key == "doc_type") f.doc_type = value;
    else if (key == "category") f.category = value;
    else if (key == "on") set_date(DateRel::On, value);
    else if (key == "before") set_date(DateRel::Before, value);
    else if (key == "after") set_date(DateRel::After, value);
    else if (key == "party_name") f.party_name = PartyPattern{value, std::nullopt};
    else if (key == "party_address") f.party_address = PartyPattern{value, std::nullopt};
    else if (key == "party") pinned = parse_party_index(value);
    else if (key == "keyword") f.keywords.insert(lower(value));
    else if (key == "contains") {
      auto at = value.rfind('@');
      if (at == std::string::npos || at == 0) bad("contains must look like Path@N, got '" + value + "'");
      UnitPath p;
      try {
        p = parse_path(value.substr(0, at));
      } catch (const Error&) {
        bad("malformed unit path in '" + value + "'");
      }
      int n = parse_int(value.substr(at + 1), "version number");
      if (n < 1) bad("version numbers start at 1");
      f.contains_version.emplace_back(std::move(p), n);
    } else if (key == "tag") {
      TagFilter t;
      std::vector<std::string> parts;
      std::size_t start = 0;
      for (int i = 0; i < 2; ++i) {
        auto colon = value.find(':', start);
        if (colon == std::string::npos) break;
        parts.push_back(value.substr(start, colon - start));
        start = colon + 1;
      }
      parts.push_back(value.substr(start));
      auto k = tag_kind_from_name(lower(parts[0]));
      if (!k) bad("tag kind must be duty or right, got '" + parts[0] + "'");
      t.kind = *k;
      if (parts.size() > 1 && !parts[1].empty() && parts[1] != "*") t.party = parse_party_index(parts[1]);
      if (parts.size() > 2 && !parts[2].empty()) t.label = parts[2];
      f.tag = t;
    } else {
      bad("unknown filter parameter '" + key + "'");
    }
  }
  if (pinned) {
    if (!f.party_name && !f.party_address) bad("party needs party_name or party_address");
    if (f.party_name) f.party_name->party = pinned;
    if (f.party_address) f.party_address->party = pinned;
  }
  return f;
}

bool matches(const QueryFilter& f, const GenericDocument* g, const DocumentInstance& inst) {
  if (f.doc_type && inst.doc_type != *f.doc_type) return false;
  if (f.category && (!g || lower(g->category) != lower(*f.category))) return false;
  if (f.date_rel) {
    if (!inst.date) return false;
    const auto& [rel, span] = *f.date_rel;
    const Date& d = *inst.date;
    switch (rel) {
      case DateRel::On:
        if (d < span.first || span.last < d) return false;
        break;
      case DateRel::Before:
        if (!(d < span.first)) return false;
        break;
      case DateRel::After:
        if (!(span.last < d)) return false;
        break;
    }
  }
  if (f.party_name && !party_matches(*f.party_name, inst, false)) return false;
  if (f.party_address && !party_matches(*f.party_address, inst, true)) return false;
  for (const auto& [p, v] : f.contains_version) {
    auto it = inst.selections.find(p);
    if (it == inst.selections.end() || it->second != v) return false;
  }
  if (!f.keywords.empty()) {
    std::set<std::string> have;
    for (const auto& [p, kws] : inst.keywords) {
      if (g && !is_included(*g, inst, p)) continue;
      for (const auto& k : kws) have.insert(lower(k));
    }
    for (const auto& k : f.keywords)
      if (!have.count(k)) return false;
  }
  if (f.tag) {
    bool any = false;
    for (const auto& [p, tags] : inst.tags) {
      for (const auto& t : tags) {
        if (t.kind != f.tag->kind) continue;
        if (f.tag->party && t.party != *f.tag->party) continue;
        if (f.tag->label && lower(t.label) != lower(*f.tag->label)) continue;
        any = true;
      }
    }
    if (!any) return false;
  }
  return true;
}

std::vector<InstanceSummary> run_query(const Store& store, const QueryFilter& f) {
  std::map<std::string, std::optional<GenericDocument>> generics;
  std::vector<InstanceSummary> out;
  for (const auto& summary : store.list_instances()) {
    DocumentInstance inst = store.get_instance(summary.id);
    auto it = generics.find(inst.doc_type);
    if (it == generics.end()) {
      std::optional<GenericDocument> g;
      try {
        g = store.get_generic(inst.doc_type);
      } catch (const Error&) {
      }
      it = generics.emplace(inst.doc_type, std::move(g)).first;
    }
    if (matches(f, it->second ? &*it->second : nullptr, inst)) out.push_back(summary);
  }
  std::stable_sort(out.begin(), out.end(), [](const InstanceSummary& a, const InstanceSummary& b) {
    if (a.date && b.date && !(*a.date == *b.date)) return *a.date < *b.date;
    if (a.date.has_value() != b.date.has_value()) return a.date.has_value();
    return a.id < b.id;
  });
  return out;
}

RenderedDocument expand(const Store& store, std::string_view id) {
  DocumentInstance inst = store.get_instance(id);
  return render_document(store.get_generic(inst.doc_type), inst);
}

}  // namespace clause
