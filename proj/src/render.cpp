#include "clause/render.hpp"

#include <algorithm>

#include "clause/error.hpp"

namespace clause {

namespace {

struct Placeholder {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last consumed character
  std::string name;
  const Value* value = nullptr;
};

// Longest identifier after '$'; when that name has no value, retry with
// trailing '.'/'-' dropped so sentence punctuation does not stick to it.
Placeholder read_placeholder(std::string_view text, std::size_t dollar, const Env& env) {
  Placeholder ph;
  ph.begin = dollar;
  std::size_t n = identifier_length(text.substr(dollar + 1));
  std::string_view name = text.substr(dollar + 1, n);
  for (std::string_view cand = name; !cand.empty();) {
    auto it = env.find(std::string(cand));
    if (it != env.end()) {
      ph.name = std::string(cand);
      ph.value = &it->second;
      ph.end = dollar + 1 + cand.size();
      return ph;
    }
    char last = cand.back();
    if (last != '.' && last != '-') break;
    cand.remove_suffix(1);
  }
  while (!name.empty() && (name.back() == '.' || name.back() == '-')) name.remove_suffix(1);
  ph.name = std::string(name);
  ph.end = dollar + 1 + name.size();
  return ph;
}

struct Scan {
  std::string out;
  std::vector<std::string> unbound;
};

Scan scan(std::string_view text, const Env& env) {
  Scan s;
  s.out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (c != '$') {
      s.out += c;
      ++i;
      continue;
    }
    if (i + 1 < text.size() && text[i + 1] == '$') {
      s.out += '$';
      i += 2;
      continue;
    }
    Placeholder ph = read_placeholder(text, i, env);
    if (ph.name.empty()) {
      s.out += '$';
      ++i;
      continue;
    }
    if (ph.value) {
      s.out += format_value(*ph.value);
    } else if (std::find(s.unbound.begin(), s.unbound.end(), ph.name) == s.unbound.end()) {
      s.unbound.push_back(ph.name);
    }
    i = ph.end;
  }
  return s;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string normalize_fragment(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r' && i + 1 < raw.size() && raw[i + 1] == '\n') continue;
    out += raw[i];
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ' || out.back() == '\t'))
    out.pop_back();
  return out;
}

// --- layout shared by the plain and markup renderers ---------------------------

struct LayoutUnit {
  UnitPath path;
  const UnitTemplate* unit = nullptr;
  std::string number;
  std::string heading;
  int version = 0;  // 0 for non-atomic units
  std::string text;
  std::vector<LayoutUnit> children;
};

struct Layout {
  std::string title;
  std::string subtitle;
  std::string parties;  // may be empty
  std::string dated;    // may be empty
  std::vector<LayoutUnit> parts;
};

class LayoutBuilder {
 public:
  LayoutBuilder(const GenericDocument& g, const DocumentInstance& inst) : g_(g), inst_(inst) {}

  Layout build() {
    Layout l;
    l.title = inst_.display_name.empty() ? inst_.id : inst_.display_name;
    l.subtitle = inst_.doc_type + " (" + inst_.id + ")";
    std::vector<std::string> party_lines;
    for (std::size_t i = 0; i < 2; ++i) {
      const Party& p = inst_.parties[i];
      if (p.name.empty() && p.address.empty()) continue;
      std::string line = (i == 0 ? "Between " : "and ") + p.name;
      if (!p.address.empty()) line += " of " + p.address;
      party_lines.push_back(line);
    }
    l.parties = join(party_lines, "\n");
    if (inst_.date) l.dated = "Dated " + inst_.date->long_form();
    l.parts = level({}, g_.parts, "");

    if (!unbound_.empty())
      throw Error(ErrorCode::UnboundPlaceholder, "unbound placeholders: " + join(unbound_, ", "),
                  unbound_);
    if (!unreadable_.empty())
      throw Error(ErrorCode::FragmentUnreadable, "unreadable fragments: " + join(unreadable_, ", "),
                  unreadable_);
    return l;
  }

 private:
  std::vector<LayoutUnit> level(const UnitPath& parent, const std::vector<UnitTemplate>& siblings,
                                const std::string& prefix) {
    auto ov = inst_.order_overrides.find(parent);
    const std::vector<std::string>* override_labels =
        ov == inst_.order_overrides.end() ? nullptr : &ov->second;
    std::vector<LayoutUnit> out;
    int position = 0;
    for (const UnitTemplate* u : ordered(siblings, override_labels)) {
      UnitPath p = parent.child(u->label);
      if (!is_included(g_, inst_, p)) continue;
      LayoutUnit lu;
      lu.path = p;
      lu.unit = u;
      lu.number = prefix.empty() ? std::to_string(++position)
                                 : prefix + "-" + std::to_string(++position);
      lu.heading = parent.empty() ? "PART " + lu.number + " — " + u->label
                                  : lu.number + " " + u->label;
      if (u->atomic()) {
        lu.version = inst_.selections.at(p);
        lu.text = fragment_text(p, *u, lu.version);
      } else {
        lu.children = level(p, u->children, lu.number);
      }
      out.push_back(std::move(lu));
    }
    return out;
  }

  std::string fragment_text(const UnitPath& p, const UnitTemplate& u, int version) {
    const TextVersion* v = u.find_version(version);
    if (!v) {
      unreadable_.push_back(p.str() + "@" + std::to_string(version));
      return {};
    }
    auto it = g_.fragments.find(v->fragment);
    if (it == g_.fragments.end()) {
      unreadable_.push_back(v->fragment);
      return {};
    }
    Scan s = scan(normalize_fragment(it->second), effective_bindings(g_, inst_, p, version));
    for (const auto& name : s.unbound) unbound_.push_back(p.str() + ": $" + name);
    return s.out;
  }

  const GenericDocument& g_;
  const DocumentInstance& inst_;
  std::vector<std::string> unbound_;
  std::vector<std::string> unreadable_;
};

void collect_toc(const std::vector<LayoutUnit>& units, std::vector<TocEntry>& toc) {
  for (const auto& u : units) {
    toc.push_back({u.number, u.path, u.unit->label});
    collect_toc(u.children, toc);
  }
}

void emit_text(const std::vector<LayoutUnit>& units, bool top, std::string& out) {
  for (const auto& u : units) {
    out += top ? "\n\n\n" : "\n\n";
    out += u.heading;
    if (u.unit->atomic()) {
      if (!u.text.empty()) out += "\n\n" + u.text;
    } else {
      emit_text(u.children, false, out);
    }
  }
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

class MarkupWriter {
 public:
  MarkupWriter(const GenericDocument& g, const DocumentInstance& inst, const Layout& layout)
      : g_(g), inst_(inst), layout_(layout) {
    std::vector<TocEntry> toc;
    collect_toc(layout.parts, toc);
    for (const auto& e : toc) numbers_[e.path] = e.number;
  }

  std::string write() {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<document type=\"" + escape(inst_.doc_type) + "\" id=\"" + escape(inst_.id) +
            "\" status=\"" + (inst_.status == InstanceStatus::Final ? "final" : "draft") + "\">\n";
    out_ += "<title>" + escape(layout_.title) + "</title>\n";
    out_ += "<subtitle>" + escape(layout_.subtitle) + "</subtitle>\n";
    if (!layout_.parties.empty()) out_ += "<parties>" + escape(layout_.parties) + "</parties>\n";
    if (!layout_.dated.empty())
      out_ += "<date value=\"" + inst_.date->iso() + "\">" + escape(layout_.dated) + "</date>\n";
    for (const auto& p : layout_.parts) unit(p, "part");
    out_ += "</document>\n";
    return out_;
  }

 private:
  void unit(const LayoutUnit& u, std::string_view element) {
    out_ += "<" + std::string(element) + " label=\"" + escape(u.unit->label) + "\" number=\"" +
            u.number + "\"";
    if (u.version) out_ += " version=\"" + std::to_string(u.version) + "\"";
    if (auto it = inst_.keywords.find(u.path); it != inst_.keywords.end() && !it->second.empty()) {
      std::vector<std::string> kw(it->second.begin(), it->second.end());
      out_ += " keywords=\"" + escape(join(kw, ";")) + "\"";
    }
    if (auto it = inst_.tags.find(u.path); it != inst_.tags.end() && !it->second.empty()) {
      std::vector<std::string> tags;
      for (const auto& t : it->second)
        tags.push_back(std::string(tag_kind_name(t.kind)) + ":" + std::to_string(t.party) + ":" +
                       t.label);
      out_ += " tags=\"" + escape(join(tags, ";")) + "\"";
    }
    out_ += ">\n<heading>" + escape(u.heading) + "</heading>\n";
    if (u.unit->atomic() && !u.text.empty()) out_ += "<text>" + escape(u.text) + "</text>\n";
    for (const auto& c : u.children) unit(c, "unit");
    for (const auto& c : g_.constraints) {
      const auto* r = std::get_if<Refers>(&c);
      if (!r || r->from != u.path) continue;
      auto target = numbers_.find(r->to);
      if (target == numbers_.end()) continue;
      out_ += "<link target=\"" + target->second + "\" path=\"" + escape(r->to.str()) + "\"/>\n";
    }
    out_ += "</" + std::string(element) + ">\n";
  }

  const GenericDocument& g_;
  const DocumentInstance& inst_;
  const Layout& layout_;
  std::map<UnitPath, std::string> numbers_;
  std::string out_;
};

}  // namespace

std::string substitute(std::string_view fragment, const Env& env) {
  Scan s = scan(fragment, env);
  if (!s.unbound.empty()) {
    std::vector<std::string> names = s.unbound;
    throw Error(ErrorCode::UnboundPlaceholder, "unbound placeholders: " + join(names, ", "), names);
  }
  return std::move(s.out);
}

std::vector<std::string> unbound_placeholders(std::string_view fragment, const Env& env) {
  return scan(fragment, env).unbound;
}

RenderedDocument render_document(const GenericDocument& g, const DocumentInstance& inst) {
  Layout layout = LayoutBuilder(g, inst).build();
  RenderedDocument doc;
  doc.text = layout.title + "\n" + layout.subtitle;
  if (!layout.parties.empty() || !layout.dated.empty()) doc.text += "\n";
  if (!layout.parties.empty()) doc.text += "\n" + layout.parties;
  if (!layout.dated.empty()) doc.text += "\n" + layout.dated;
  emit_text(layout.parts, true, doc.text);
  doc.text += "\n";
  collect_toc(layout.parts, doc.toc);
  for (const auto& [path, version] : inst.selections)
    if (!is_included(g, inst, path) && find_unit(g, path))
      doc.warnings.push_back("selection for '" + path.str() + "' ignored: unit not included");
  return doc;
}

std::string export_markup(const GenericDocument& g, const DocumentInstance& inst) {
  Layout layout = LayoutBuilder(g, inst).build();
  return MarkupWriter(g, inst, layout).write();
}

}  // namespace clause
