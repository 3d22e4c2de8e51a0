#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "clause/api.hpp"
#include "clause/constraints.hpp"
#include "clause/query.hpp"

using namespace clause;

namespace {

struct Output {
  bool as_json = false;

  int emit(const ApiResponse& r, const std::function<void(const json&)>& human) const {
    if (as_json) {
      std::cout << r.body.dump(2) << "\n";
    } else if (r.status >= 300) {
      const json& e = r.body["error"];
      std::cerr << "error (" << e["code"].get<std::string>() << "): " << e["message"].get<std::string>() << "\n";
      for (const auto& d : e["details"]) std::cerr << "  " << d.get<std::string>() << "\n";
      if (r.body.contains("violations")) print_violations(r.body["violations"], std::cerr);
    } else {
      human(r.body);
    }
    return exit_code(r.status);
  }

  static int exit_code(int status) {
    if (status < 300) return 0;
    return status == 400 ? 2 : 1;
  }

  static std::string path_text(const json& p) {
    std::string out;
    for (const auto& l : p) out += (out.empty() ? "" : "/") + l.get<std::string>();
    return out;
  }

  static void print_violations(const json& vs, std::ostream& os) {
    if (vs.empty()) {
      os << "no violations\n";
      return;
    }
    for (const auto& v : vs) {
      os << (v["pending"].get<bool>() ? "pending " : "") << v["kind"].get<std::string>() << ": "
         << v["message"].get<std::string>() << "\n";
      for (const auto& r : v.value("remedies", json::array())) {
        std::string target = r.contains("path") ? path_text(r["path"]) : "$" + r["name"].get<std::string>();
        os << "  remedy: " << r["action"].get<std::string>() << " " << target << "\n";
      }
    }
  }
};

void print_summary(const json& s) {
  std::cout << s["id"].get<std::string>() << ": " << s["display_name"].get<std::string>() << "  ["
            << s["doc_type"].get<std::string>() << ", "
            << (s["date"].is_null() ? std::string("undated") : s["date"].get<std::string>()) << ", "
            << s["status"].get<std::string>() << "]\n";
}

json party_json(const std::string& spec) {
  auto bar = spec.find('|');
  if (bar == std::string::npos) return {{"name", spec}, {"address", ""}};
  return {{"name", spec.substr(0, bar)}, {"address", spec.substr(bar + 1)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clause: constraint-driven contract assembly"};
  app.require_subcommand(1);
  std::string store_path = std::getenv("CLAUSE_STORE") ? std::getenv("CLAUSE_STORE") : "store";
  Output out;
  app.add_option("--store", store_path, "Store directory (default $CLAUSE_STORE or ./store)");
  app.add_flag("--json", out.as_json, "Machine-readable output");

  int code = 0;
  auto with_api = [&](const std::function<int(Api&)>& fn) {
    return [&, fn] {
      Store store(store_path);
      Api api(store);
      code = fn(api);
    };
  };

  // generic
  auto* generic = app.add_subcommand("generic", "Generic documents")->require_subcommand(1);
  generic->add_subcommand("list", "List stored document types")->callback(with_api([&](Api& api) {
    return out.emit(api.list_generics(), [](const json& b) {
      for (const auto& g : b["generics"])
        std::cout << g["doc_type"].get<std::string>() << "\t" << g["category"].get<std::string>() << "\t"
                  << g["parts"].get<int>() << " parts\n";
    });
  }));
  std::string doc_type;
  auto* show = generic->add_subcommand("show", "Print a generic document with its fragments");
  show->add_option("doc_type", doc_type)->required();
  show->callback(with_api([&](Api& api) {
    return out.emit(api.get_generic(doc_type), [](const json& b) { std::cout << b.dump(2) << "\n"; });
  }));
  std::string file;
  auto* import = generic->add_subcommand("import", "Validate and store a generic bundle file");
  import->add_option("file", file)->required()->check(CLI::ExistingFile);
  import->callback(with_api([&](Api& api) {
    ApiResponse r;
    try {
      GenericDocument g = load_generic_file(file);
      api.store().put_generic(g);
      r = {200, {{"doc_type", g.doc_type}}};
    } catch (const Error& e) {
      r = {http_status(e.code()), error_json(e)};
    }
    return out.emit(r, [](const json& b) { std::cout << "imported " << b["doc_type"].get<std::string>() << "\n"; });
  }));
  auto* validate = generic->add_subcommand("validate", "Check a generic bundle file");
  validate->add_option("file", file)->required()->check(CLI::ExistingFile);
  validate->callback([&] {
    ApiResponse r;
    try {
      ValidationReport rep = validate_generic(load_generic_file(file));
      r = {rep.ok() ? 200 : 422, {{"ok", rep.ok()}, {"errors", rep.errors}, {"warnings", rep.warnings}}};
    } catch (const Error& e) {
      r = {http_status(e.code()), error_json(e)};
    }
    if (out.as_json || r.status >= 300 && !r.body.contains("errors")) {
      code = out.emit(r, [](const json&) {});
      return;
    }
    for (const auto& w : r.body["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    for (const auto& e : r.body["errors"]) std::cout << "error: " << e.get<std::string>() << "\n";
    if (r.status == 200) std::cout << "OK\n";
    code = Output::exit_code(r.status);
  });

  // instance
  auto* instance = app.add_subcommand("instance", "Stored instances")->require_subcommand(1);
  auto* iimport = instance->add_subcommand("import", "Store an instance file");
  iimport->add_option("file", file)->required()->check(CLI::ExistingFile);
  iimport->callback(with_api([&](Api& api) {
    ApiResponse r;
    try {
      DocumentInstance d = load_instance_file(file);
      api.store().put_instance(d);
      r = {200, {{"id", d.id}}};
    } catch (const Error& e) {
      r = {http_status(e.code()), error_json(e)};
    }
    return out.emit(r, [](const json& b) { std::cout << "imported " << b["id"].get<std::string>() << "\n"; });
  }));
  std::string id;
  auto* ishow = instance->add_subcommand("show", "Print a stored instance");
  ishow->add_option("id", id)->required();
  ishow->callback(with_api([&](Api& api) {
    return out.emit(api.get_instance(id), [](const json& b) { std::cout << b.dump(2) << "\n"; });
  }));

  // draft
  auto* draft = app.add_subcommand("draft", "Drafting sessions")->require_subcommand(1);
  std::string display_name;
  auto* dnew = draft->add_subcommand("new", "Start a session on a document type");
  dnew->add_option("doc_type", doc_type)->required();
  dnew->add_option("--name", display_name, "Display name of the new document");
  dnew->callback(with_api([&](Api& api) {
    json body = {{"doc_type", doc_type}};
    if (!display_name.empty()) body["display_name"] = display_name;
    return out.emit(api.start_session(body), [](const json& b) {
      std::cout << "session " << b["session_id"].get<std::string>() << "\n"
                << "instance " << b["draft"]["id"].get<std::string>() << "\n";
    });
  }));
  auto session_text = [](const json& s) {
    std::cout << "session " << s["session_id"].get<std::string>() << "\n"
              << "doc_type " << s["doc_type"].get<std::string>() << "\n"
              << "instance " << s["draft"]["id"].get<std::string>() << "\n"
              << "stage " << s["stage"].get<std::string>() << "\n"
              << "autocheck " << (s["autocheck"].get<bool>() ? "on" : "off") << "\n"
              << "edits " << s["edit_log"].size() << "\n"
              << "selected units " << s["draft"]["selections"].size() << "\n";
  };
  auto* resume = draft->add_subcommand("resume", "Show a session's state");
  resume->add_option("session", id)->required();
  resume->callback(with_api([&](Api& api) { return out.emit(api.get_session(id), session_text); }));

  auto* dedit = draft->add_subcommand("edit", "Apply one edit to a session");
  dedit->add_option("session", id)->required();
  std::string edit_json, include, exclude, choose, set, scope, party1, party2, date, autocheck, stage, name, notes;
  auto* edit_group = dedit->add_option_group("edit", "Exactly one edit");
  edit_group->add_option("--edit", edit_json, "Edit as JSON");
  edit_group->add_option("--include", include, "Include a unit path");
  edit_group->add_option("--exclude", exclude, "Exclude a unit path");
  edit_group->add_option("--choose", choose, "Choose a version: Path@N");
  edit_group->add_option("--set", set, "Bind a parameter: name=value (see --scope)");
  edit_group->add_option("--party1", party1, "First party: 'Name|Address'");
  edit_group->add_option("--party2", party2, "Second party: 'Name|Address'");
  edit_group->add_option("--date", date, "Document date YYYY-MM-DD");
  edit_group->add_option("--autocheck", autocheck, "on|off")->check(CLI::IsMember({"on", "off"}));
  edit_group->add_option("--stage", stage, "meta|compulsory|optional|review");
  edit_group->add_option("--name", name, "Display name");
  edit_group->add_option("--notes", notes, "Notes text");
  edit_group->require_option(1);
  dedit->add_option("--scope", scope, "Unit path a --set binding applies to");
  dedit->callback(with_api([&](Api& api) {
    json e;
    try {
      if (!edit_json.empty()) e = json::parse(edit_json);
      else if (!include.empty()) e = {{"type", "include_unit"}, {"path", include}};
      else if (!exclude.empty()) e = {{"type", "exclude_unit"}, {"path", exclude}};
      else if (!choose.empty()) {
        auto at = choose.rfind('@');
        if (at == std::string::npos) throw CLI::ValidationError("--choose", "expected Path@N");
        e = {{"type", "choose_version"}, {"path", choose.substr(0, at)}, {"version", std::stoi(choose.substr(at + 1))}};
      } else if (!set.empty()) {
        auto eq = set.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--set", "expected name=value");
        std::string pname = set.substr(0, eq);
        if (!pname.empty() && pname[0] == '$') pname.erase(0, 1);
        e = {{"type", "set_param"}, {"name", pname}, {"value", set.substr(eq + 1)}};
        if (!scope.empty()) e["scope"] = scope;
      } else if (!party1.empty() || !party2.empty()) {
        json s = api.get_session(id).body;
        if (!s.contains("draft")) return out.emit(api.get_session(id), [](const json&) {});
        json p1 = party1.empty() ? s["draft"]["parties"][0] : party_json(party1);
        json p2 = party2.empty() ? s["draft"]["parties"][1] : party_json(party2);
        e = {{"type", "set_parties"}, {"party1", p1}, {"party2", p2}};
      } else if (!date.empty()) e = {{"type", "set_date"}, {"date", date}};
      else if (!autocheck.empty()) e = {{"type", "toggle_autocheck"}, {"on", autocheck == "on"}};
      else if (!stage.empty()) e = {{"type", "set_stage"}, {"stage", stage}};
      else if (!name.empty()) e = {{"type", "set_display_name"}, {"name", name}};
      else e = {{"type", "set_notes"}, {"text", notes}};
    } catch (const json::exception& ex) {
      return out.emit({400, error_json(Error(ErrorCode::BadRequest, ex.what()))}, [](const json&) {});
    } catch (const std::invalid_argument&) {
      return out.emit({400, error_json(Error(ErrorCode::BadRequest, "bad version number"))}, [](const json&) {});
    }
    return out.emit(api.post_edit(id, e), [](const json& b) {
      std::cout << "stage " << b["session"]["stage"].get<std::string>() << ", "
                << b["session"]["edit_log"].size() << " edits\n";
      if (b["session"]["autocheck"].get<bool>()) Output::print_violations(b["violations"], std::cout);
    });
  }));
  auto* dcheck = draft->add_subcommand("check", "Check a session against its constraints");
  dcheck->add_option("session", id)->required();
  dcheck->callback(with_api([&](Api& api) {
    return out.emit(api.check(id), [](const json& b) { Output::print_violations(b["violations"], std::cout); });
  }));
  auto* dfinal = draft->add_subcommand("finalize", "Finalize a session into a stored instance");
  dfinal->add_option("session", id)->required();
  dfinal->callback(with_api([&](Api& api) {
    return out.emit(api.finalize(id), [](const json& b) {
      std::cout << "finalized " << b["instance_id"].get<std::string>() << "\n";
    });
  }));

  // render / expand
  bool markup = false;
  auto* render = app.add_subcommand("render", "Render a stored instance");
  render->add_option("id", id)->required();
  render->add_flag("--markup", markup, "Nested-tag markup instead of plain text");
  render->callback(with_api([&](Api& api) {
    return out.emit(api.render(id, markup ? "markup" : "text"),
                    [](const json& b) { std::cout << b["text"].get<std::string>(); });
  }));
  auto* expand_cmd = app.add_subcommand("expand", "Show the full text of a stored instance");
  expand_cmd->add_option("id", id)->required();
  expand_cmd->callback(with_api([&](Api& api) {
    return out.emit(api.render(id, "text"), [](const json& b) { std::cout << b["text"].get<std::string>(); });
  }));

  // query
  auto* query = app.add_subcommand("query", "Find stored instances");
  std::map<std::string, std::string> single;
  for (const char* key : {"doc_type", "category", "on", "before", "after", "party_name", "party_address", "party", "tag"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    query->add_option(flag, single[key]);
  }
  std::vector<std::string> keywords, contains;
  query->add_option("--keyword", keywords, "Keyword (repeatable)");
  query->add_option("--contains", contains, "Unit version Path@N (repeatable)");
  query->callback(with_api([&](Api& api) {
    std::vector<std::pair<std::string, std::string>> params;
    for (const auto& [k, v] : single)
      if (query->count(std::string("--") + [](std::string s) {
            std::replace(s.begin(), s.end(), '_', '-');
            return s;
          }(k)))
        params.emplace_back(k, v);
    for (const auto& k : keywords) params.emplace_back("keyword", k);
    for (const auto& c : contains) params.emplace_back("contains", c);
    return out.emit(api.query(params), [](const json& b) {
      for (const auto& s : b["results"]) print_summary(s);
    });
  }));

  // fsck
  app.add_subcommand("fsck", "Check store integrity")->callback(with_api([&](Api& api) {
    json findings = json::array();
    for (const auto& f : api.store().integrity_check())
      findings.push_back({{"kind", f.kind}, {"subject", f.subject}, {"message", f.message}});
    ApiResponse r{200, {{"findings", findings}}};
    out.emit(r, [](const json& b) {
      if (b["findings"].empty()) std::cout << "clean\n";
      for (const auto& f : b["findings"])
        std::cout << f["kind"].get<std::string>() << "\t" << f["subject"].get<std::string>() << "\t"
                  << f["message"].get<std::string>() << "\n";
    });
    return findings.empty() ? 0 : 1;
  }));

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");
  serve->callback([&] {
    Store store(store_path);
    Api api(store);
    auto srv = make_server(api);
    std::cerr << "listening on " << host << ":" << port << "\n";
    code = srv->listen(host, port) ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return Output::exit_code(http_status(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
