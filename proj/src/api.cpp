#include "clause/api.hpp"

#include "httplib.h"

#include "clause/query.hpp"
#include "clause/render.hpp"

namespace clause {

namespace {

template <typename F>
ApiResponse guarded(int ok, F&& f) {
  try {
    return {ok, f()};
  } catch (const ViolationsOutstanding& e) {
    return {409, error_json(e)};
  } catch (const Error& e) {
    return {http_status(e.code()), error_json(e)};
  } catch (const json::exception& e) {
    return {400, error_json(Error(ErrorCode::BadRequest, e.what()))};
  }
}

json date_json(const std::optional<Date>& d) { return d ? json(d->iso()) : json(nullptr); }

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDocType:
    case ErrorCode::UnknownInstance:
    case ErrorCode::UnknownSession:
      return 404;
    case ErrorCode::ViolationsOutstanding:
      return 409;
    case ErrorCode::NotAtomic:
    case ErrorCode::KindMismatch:
    case ErrorCode::UnboundPlaceholder:
    case ErrorCode::ValidationFailed:
    case ErrorCode::EditRejected:
      return 422;
    case ErrorCode::ParseError:
    case ErrorCode::BadFilter:
    case ErrorCode::BadRequest:
      return 400;
    case ErrorCode::FragmentUnreadable:
    case ErrorCode::Io:
      return 500;
  }
  return 500;
}

json error_json(const Error& e, const GenericDocument* g, const DocumentInstance* inst) {
  json body = {{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}, {"details", e.details()}}}};
  if (const auto* v = dynamic_cast<const ViolationsOutstanding*>(&e))
    body["violations"] = g && inst ? violations_json(v->violations(), *g, *inst) : to_json(v->violations());
  return body;
}

json summary_json(const InstanceSummary& s) {
  return {{"id", s.id},
          {"display_name", s.display_name},
          {"doc_type", s.doc_type},
          {"category", s.category},
          {"parties", json::array({to_json(s.parties[0]), to_json(s.parties[1])})},
          {"date", date_json(s.date)},
          {"status", s.status == InstanceStatus::Final ? "final" : "draft"}};
}

json violations_json(const std::vector<Violation>& vs, const GenericDocument& g, const DocumentInstance& inst) {
  json out = json::array();
  for (const auto& v : vs) {
    json j = to_json(v);
    json rs = json::array();
    for (const auto& r : suggest_remedies(v, g, inst)) rs.push_back(to_json(r));
    j["remedies"] = rs;
    out.push_back(j);
  }
  return out;
}

Api::Api(Store& store, std::string id_prefix) : store_(store), drafter_(store, std::move(id_prefix)) {}

ApiResponse Api::list_generics() {
  return guarded(200, [&] {
    json out = json::array();
    for (const auto& t : store_.list_generics()) {
      GenericDocument g = store_.get_generic(t);
      out.push_back({{"doc_type", g.doc_type}, {"category", g.category}, {"parts", g.parts.size()}});
    }
    return json{{"generics", out}};
  });
}

ApiResponse Api::get_generic(const std::string& doc_type) {
  return guarded(200, [&] { return bundle_to_json(store_.get_generic(doc_type)); });
}

ApiResponse Api::start_session(const json& body) {
  return guarded(201, [&] {
    if (!body.is_object() || !body.contains("doc_type") || !body["doc_type"].is_string())
      throw Error(ErrorCode::BadRequest, "body must be {\"doc_type\": ...}");
    Session s = drafter_.start_session(body["doc_type"].get<std::string>(), body.value("display_name", ""));
    return to_json(s);
  });
}

ApiResponse Api::get_session(const std::string& id) {
  return guarded(200, [&] { return to_json(drafter_.get_session(id)); });
}

ApiResponse Api::post_edit(const std::string& id, const json& body) {
  return guarded(200, [&] {
    Session s = drafter_.get_session(id);
    GenericDocument g = store_.get_generic(s.doc_type);
    Edit e = edit_from_json(body, &g);
    EditOutcome out = drafter_.apply_edit(id, std::move(e));
    GenericDocument now = store_.get_generic(s.doc_type);
    return json{{"session", to_json(out.session)},
                {"violations", violations_json(out.violations, now, out.session.draft)}};
  });
}

ApiResponse Api::check(const std::string& id) {
  return guarded(200, [&] {
    Session s = drafter_.get_session(id);
    GenericDocument g = store_.get_generic(s.doc_type);
    return json{{"violations", violations_json(check_session(g, s), g, s.draft)}};
  });
}

ApiResponse Api::finalize(const std::string& id) {
  try {
    DocumentInstance inst = drafter_.finalize(id);
    return {200, json{{"instance_id", inst.id}, {"instance", to_json(inst)}}};
  } catch (const ViolationsOutstanding& e) {
    Session s = drafter_.get_session(id);
    GenericDocument g = store_.get_generic(s.doc_type);
    return {409, error_json(e, &g, &s.draft)};
  } catch (...) {
    return guarded(200, [] () -> json { throw; });
  }
}

ApiResponse Api::query(const std::vector<std::pair<std::string, std::string>>& params) {
  return guarded(200, [&] {
    json out = json::array();
    for (const auto& s : run_query(store_, parse_filter(params))) out.push_back(summary_json(s));
    return json{{"results", out}};
  });
}

ApiResponse Api::get_instance(const std::string& id) {
  return guarded(200, [&] { return to_json(store_.get_instance(id)); });
}

ApiResponse Api::render(const std::string& id, const std::string& format) {
  return guarded(200, [&] {
    DocumentInstance inst = store_.get_instance(id);
    GenericDocument g = store_.get_generic(inst.doc_type);
    if (format == "markup") return json{{"id", id}, {"format", "markup"}, {"text", export_markup(g, inst)}};
    if (format != "text" && !format.empty())
      throw Error(ErrorCode::BadRequest, "format must be text or markup");
    RenderedDocument r = render_document(g, inst);
    json toc = json::array();
    for (const auto& t : r.toc) toc.push_back({{"number", t.number}, {"path", to_json(t.path)}, {"label", t.label}});
    return json{{"id", id}, {"format", "text"}, {"text", r.text}, {"toc", toc}, {"warnings", r.warnings}};
  });
}

std::unique_ptr<httplib::Server> make_server(Api& api) {
  auto srv = std::make_unique<httplib::Server>();
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req, json& out) -> std::optional<ApiResponse> {
    try {
      out = req.body.empty() ? json::object() : json::parse(req.body);
      return std::nullopt;
    } catch (const json::exception& e) {
      return ApiResponse{400, error_json(Error(ErrorCode::BadRequest, std::string("malformed JSON body: ") + e.what()))};
    }
  };

  srv->Get("/api/generics", [&api, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, api.list_generics());
  });
  srv->Get(R"(/api/generics/(.+))", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.get_generic(req.matches[1]));
  });
  srv->Post("/api/sessions", [&api, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (auto err = parse_body(req, body)) return reply(res, *err);
    reply(res, api.start_session(body));
  });
  srv->Get(R"(/api/sessions/([^/]+))", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.get_session(req.matches[1]));
  });
  srv->Post(R"(/api/sessions/([^/]+)/edits)",
            [&api, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
              json body;
              if (auto err = parse_body(req, body)) return reply(res, *err);
              reply(res, api.post_edit(req.matches[1], body));
            });
  srv->Post(R"(/api/sessions/([^/]+)/check)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.check(req.matches[1]));
  });
  srv->Post(R"(/api/sessions/([^/]+)/finalize)",
            [&api, reply](const httplib::Request& req, httplib::Response& res) {
              reply(res, api.finalize(req.matches[1]));
            });
  srv->Get("/api/instances", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::pair<std::string, std::string>> params(req.params.begin(), req.params.end());
    reply(res, api.query(params));
  });
  srv->Get(R"(/api/instances/([^/]+))", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, api.get_instance(req.matches[1]));
  });
  srv->Get(R"(/api/instances/([^/]+)/render)", [&api, reply](const httplib::Request& req, httplib::Response& res) {
    std::string format = req.has_param("format") ? req.get_param_value("format") : "text";
    reply(res, api.render(req.matches[1], format));
  });
  srv->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(error_json(Error(ErrorCode::Io, what)).dump(), "application/json");
  });
  return srv;
}

}  // namespace clause
