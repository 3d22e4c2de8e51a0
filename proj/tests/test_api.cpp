#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <thread>

#include "httplib.h"

#include "clause/api.hpp"
#include "support.hpp"

using namespace clause;
using testing_support::install_fixtures;
using testing_support::TempDir;

namespace {

// An in-process service on an ephemeral loopback port.
class Service {
 public:
  explicit Service(const std::filesystem::path& root) : store_(root), api_(store_), server_(make_server(api_)) {
    port_ = server_->bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
  }
  ~Service() {
    server_->stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
  Api& api() { return api_; }

 private:
  Store store_;
  Api api_;
  std::unique_ptr<httplib::Server> server_;
  int port_ = 0;
  std::thread thread_;
};

struct Reply {
  int status = 0;
  json body;
};

Reply get(httplib::Client& c, const std::string& path) {
  auto r = c.Get(path);
  REQUIRE(r);
  return {r->status, json::parse(r->body)};
}

Reply post(httplib::Client& c, const std::string& path, const json& body) {
  auto r = c.Post(path, body.dump(), "application/json");
  REQUIRE(r);
  return {r->status, json::parse(r->body)};
}

Reply post_raw(httplib::Client& c, const std::string& path, const std::string& body) {
  auto r = c.Post(path, body, "application/json");
  REQUIRE(r);
  return {r->status, json::parse(r->body)};
}

struct CliRun {
  int exit_code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

CliRun cli(const std::filesystem::path& store, const std::vector<std::string>& args) {
  std::string cmd = quote(CLAUSE_CLI_PATH) + " --store " + quote(store.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  CliRun run;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) run.out.append(buf, n);
  int status = ::pclose(p);
  run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return run;
}

json edit_body(const std::string& type, json fields = json::object()) {
  fields["type"] = type;
  return fields;
}

const json kAssignment = json::array({"Assignment and Sub-Contracting"});
const json kLiability = json::array({"Assignment and Sub-Contracting", "Sub-Contractors Liability"});

}  // namespace

TEST_CASE("generic endpoints") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  Service svc(dir.path());
  auto c = svc.client();
  Reply list = get(c, "/api/generics");
  CHECK(list.status == 200);
  REQUIRE(list.body["generics"].size() == 2);
  CHECK(list.body["generics"][1]["doc_type"] == "IEE MF/2");
  CHECK(list.body["generics"][1]["parts"] == 20);
  Reply one = get(c, "/api/generics/IEE%20MF%2F2");
  CHECK(one.status == 200);
  CHECK(one.body["parts"].size() == 20);
  CHECK(one.body.contains("fragments"));
  Reply missing = get(c, "/api/generics/Nothing");
  CHECK(missing.status == 404);
  CHECK(missing.body["error"]["code"] == "unknown_doc_type");
}

TEST_CASE("a drafting session over HTTP") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  std::string sid;
  {
    Service svc(dir.path());
    auto c = svc.client();
    Reply started = post(c, "/api/sessions", {{"doc_type", "IEE MF/2"}, {"display_name", "Leeds Plant 1995"}});
    REQUIRE(started.status == 201);
    sid = started.body["session_id"].get<std::string>();
    CHECK(started.body["draft"]["id"] == "Q1");
    CHECK(started.body["draft"]["display_name"] == "Leeds Plant 1995");
    const std::string base = "/api/sessions/" + sid;

    CHECK(post(c, base + "/edits", edit_body("toggle_autocheck", {{"on", true}})).status == 200);
    Reply parties = post(c, base + "/edits",
                         edit_body("set_parties", {{"party1", {{"name", "British Gas plc"}, {"address", "UK"}}},
                                              {"party2", {{"name", "Wessex Engineering Ltd"}, {"address", "UK"}}}}));
    CHECK(parties.status == 200);
    CHECK(parties.body["violations"].empty());

    Reply forced = post(c, base + "/edits", edit_body("include_unit", {{"path", kAssignment}}));
    REQUIRE(forced.status == 200);
    REQUIRE(forced.body["violations"].size() == 1);
    const json& v = forced.body["violations"][0];
    CHECK(v["kind"] == "forces_unsatisfied");
    CHECK(v["subjects"] == json::array({{{"unit", kLiability}}}));
    CHECK(v["pending"] == false);
    REQUIRE(v["remedies"].size() >= 1);
    CHECK(v["remedies"][0]["action"] == "include");
    CHECK(v["remedies"][0]["path"] == kLiability);

    Reply remedied = post(c, base + "/edits", edit_body("include_unit", {{"path", v["remedies"][0]["path"]}}));
    CHECK(remedied.body["violations"].empty());
    CHECK(post(c, base + "/check", json::object()).body == json{{"violations", json::array()}});

    Reply bad_version = post(c, base + "/edits", edit_body("choose_version", {{"path", "Precedence of Documents"}, {"version", 9}}));
    CHECK(bad_version.status == 422);
    CHECK(bad_version.body["error"]["code"] == "edit_rejected");
    CHECK(post(c, base + "/edits", edit_body("explode")).status == 400);
    CHECK(post_raw(c, base + "/edits", "{not json").status == 400);
    CHECK(post(c, base + "/edits", edit_body("set_date", {{"date", "1995-02-30"}})).status == 400);

    Reply early = post(c, base + "/finalize", json::object());
    CHECK(early.status == 422);
    for (const char* st : {"compulsory", "optional", "review"})
      REQUIRE(post(c, base + "/edits", edit_body("set_stage", {{"stage", st}})).status == 200);
    post(c, base + "/edits", edit_body("set_date", {{"date", "1995-02-01"}}));

    Reply blocked = post(c, base + "/finalize", json::object());
    CHECK(blocked.status == 409);
    CHECK(blocked.body["error"]["code"] == "violations_outstanding");
    REQUIRE(blocked.body["violations"].size() == 1);
    CHECK(blocked.body["violations"][0]["kind"] == "missing_parameter");
    CHECK(blocked.body["violations"][0]["subjects"] == json::array({{{"param", "Engineer"}}}));
    CHECK(blocked.body["violations"][0]["remedies"][0]["action"] == "set_parameter");

    CHECK(post(c, base + "/edits", edit_body("set_param", {{"name", "Engineer"}, {"value", "Frank"}})).status == 200);
    Reply done = post(c, base + "/finalize", json::object());
    REQUIRE(done.status == 200);
    CHECK(done.body["instance_id"] == "Q1");
    CHECK(done.body["instance"]["status"] == "final");
    CHECK(get(c, "/api/instances/Q1").body == done.body["instance"]);
    CHECK(post(c, base + "/edits", edit_body("set_notes", {{"text", "late"}})).status == 422);
    CHECK(post(c, base + "/finalize", json::object()).status == 422);
  }
  // Sessions survive a restart of the service.
  Service again(dir.path());
  auto c = again.client();
  Reply back = get(c, "/api/sessions/" + sid);
  CHECK(back.status == 200);
  CHECK(back.body["stage"] == "finalized");
  CHECK(back.body["draft"]["status"] == "final");
  CHECK(get(c, "/api/sessions/0000").status == 404);
  CHECK(post(c, "/api/sessions/0000/check", json::object()).status == 404);
  CHECK(post(c, "/api/sessions", {{"doc_type", "Nothing"}}).status == 404);
  CHECK(post(c, "/api/sessions", json::object()).status == 400);
  CHECK(post_raw(c, "/api/sessions", "[").status == 400);
}

TEST_CASE("instances, queries and rendering over HTTP") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  Service svc(dir.path());
  auto c = svc.client();
  Reply r = get(c, "/api/instances?category=research&before=1994-12&party_address=France&contains=" +
                       httplib::detail::encode_query_param("Certificates and Payment/Payment Terms@3"));
  REQUIRE(r.status == 200);
  REQUIRE(r.body["results"].size() == 1);
  CHECK(r.body["results"][0]["id"] == "R1");
  CHECK(r.body["results"][0]["display_name"] == "Paris Plant 1992");
  Reply all = get(c, "/api/instances");
  REQUIRE(all.body["results"].size() == 3);
  CHECK(all.body["results"][2]["id"] == "R3");
  CHECK(get(c, "/api/instances?keyword=payment&keyword=milestones").body["results"].size() == 1);
  Reply malformed = get(c, "/api/instances?before=1994-13");
  CHECK(malformed.status == 400);
  CHECK(malformed.body["error"]["code"] == "bad_filter");

  CHECK(get(c, "/api/instances/R1").body["display_name"] == "Paris Plant 1992");
  CHECK(get(c, "/api/instances/NOPE").status == 404);
  Reply text = get(c, "/api/instances/R1/render");
  CHECK(text.status == 200);
  CHECK(text.body["text"].get<std::string>().rfind("Paris Plant 1992\n", 0) == 0);
  CHECK(text.body["toc"].size() > 20);
  Reply markup = get(c, "/api/instances/R1/render?format=markup");
  CHECK(markup.body["text"].get<std::string>().rfind("<?xml", 0) == 0);
  CHECK(get(c, "/api/instances/R1/render?format=pdf").status == 400);
  CHECK(get(c, "/api/instances/NOPE/render").status == 404);
}

TEST_CASE("HTTP bodies match the engine adapter") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  Service svc(dir.path());
  auto c = svc.client();
  Api& api = svc.api();
  CHECK(get(c, "/api/generics").body == api.list_generics().body);
  CHECK(get(c, "/api/generics/Equipment%20Clause").body == api.get_generic("Equipment Clause").body);
  CHECK(get(c, "/api/instances?party_address=France").body == api.query({{"party_address", "France"}}).body);
  CHECK(get(c, "/api/instances/R2").body == api.get_instance("R2").body);
  CHECK(get(c, "/api/instances/R3/render?format=markup").body == api.render("R3", "markup").body);
  CHECK(get(c, "/api/instances/NOPE").body == api.get_instance("NOPE").body);
  std::string sid = api.start_session({{"doc_type", "IEE MF/2"}}).body["session_id"];
  CHECK(post(c, "/api/sessions/" + sid + "/check", json::object()).body == api.check(sid).body);
  CHECK(get(c, "/api/sessions/" + sid).body == api.get_session(sid).body);
}

TEST_CASE("CLI --json output equals the HTTP body") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  Service svc(dir.path());
  auto c = svc.client();
  auto same = [&](const std::vector<std::string>& args, const std::string& path, int exit_code, bool is_post = false) {
    std::vector<std::string> full{"--json"};
    full.insert(full.end(), args.begin(), args.end());
    CliRun run = cli(dir.path(), full);
    INFO("clause ", args.front(), " ", args.size() > 1 ? args[1] : "", " exit ", run.exit_code);
    CHECK(run.exit_code == exit_code);
    CHECK(json::parse(run.out) == (is_post ? post(c, path, json::object()) : get(c, path)).body);
  };
  same({"generic", "list"}, "/api/generics", 0);
  same({"generic", "show", "IEE MF/2"}, "/api/generics/IEE%20MF%2F2", 0);
  same({"instance", "show", "R1"}, "/api/instances/R1", 0);
  same({"instance", "show", "NOPE"}, "/api/instances/NOPE", 1);
  same({"render", "R1"}, "/api/instances/R1/render", 0);
  same({"render", "R1", "--markup"}, "/api/instances/R1/render?format=markup", 0);
  same({"query", "--category", "research", "--before", "1994-12", "--party-address", "France", "--contains",
        "Certificates and Payment/Payment Terms@3"},
       "/api/instances?category=research&before=1994-12&party_address=France&contains=" +
           httplib::detail::encode_query_param("Certificates and Payment/Payment Terms@3"),
       0);
  same({"query", "--keyword", "payment", "--keyword", "milestones"}, "/api/instances?keyword=payment&keyword=milestones", 0);
  same({"query", "--before", "1994-13"}, "/api/instances?before=1994-13", 2);

  std::string sid = json::parse(cli(dir.path(), {"--json", "draft", "new", "IEE MF/2"}).out)["session_id"];
  CliRun edited = cli(dir.path(), {"--json", "draft", "edit", sid, "--include", "Assignment and Sub-Contracting"});
  CHECK(edited.exit_code == 0);
  same({"draft", "check", sid}, "/api/sessions/" + sid + "/check", 0, true);
  same({"draft", "resume", sid}, "/api/sessions/" + sid, 0);
}

TEST_CASE("CLI exit codes and human output") {
  TempDir dir;
  {
    Store s(dir.path());
    install_fixtures(s);
  }
  CliRun q = cli(dir.path(), {"query", "--category", "research", "--before", "1994-12", "--party-address", "France",
                              "--contains", "Certificates and Payment/Payment Terms@3"});
  CHECK(q.exit_code == 0);
  CHECK(q.out == "R1: Paris Plant 1992  [IEE MF/2, 1992-06-15, final]\n");
  CliRun v = cli(dir.path(), {"generic", "validate", (testing_support::fixture_dir() / "iee-mf-2" / "generic.json").string()});
  CHECK(v.exit_code == 0);
  CHECK(v.out == "OK\n");
  CHECK(cli(dir.path(), {"fsck"}).out == "clean\n");
  CHECK(cli(dir.path(), {"no-such-command"}).exit_code == 2);
  CHECK(cli(dir.path(), {"query", "--on", "yesterday"}).exit_code == 2);
  CHECK(cli(dir.path(), {"expand", "NOPE"}).exit_code == 1);

  std::string sid = json::parse(cli(dir.path(), {"--json", "draft", "new", "IEE MF/2"}).out)["session_id"];
  for (const char* st : {"compulsory", "optional", "review"}) cli(dir.path(), {"draft", "edit", sid, "--stage", st});
  CliRun blocked = cli(dir.path(), {"draft", "finalize", sid});
  CHECK(blocked.exit_code == 1);
  CliRun blocked_json = cli(dir.path(), {"--json", "draft", "finalize", sid});
  CHECK(blocked_json.exit_code == 1);
  json body = json::parse(blocked_json.out);
  CHECK(body["error"]["code"] == "violations_outstanding");
  CHECK(body["violations"].size() == 6);
  cli(dir.path(), {"draft", "edit", sid, "--party1", "British Gas plc|UK"});
  cli(dir.path(), {"draft", "edit", sid, "--party2", "Wessex Engineering Ltd|UK"});
  cli(dir.path(), {"draft", "edit", sid, "--date", "1995-03-01"});
  cli(dir.path(), {"draft", "edit", sid, "--set", "Engineer=Frank"});
  CliRun done = cli(dir.path(), {"--json", "draft", "finalize", sid});
  CHECK(done.exit_code == 0);
  CHECK(json::parse(done.out)["instance_id"] == "Q1");
  CHECK(cli(dir.path(), {"expand", "Q1"}).exit_code == 0);
}
