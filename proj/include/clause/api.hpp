#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "clause/drafter.hpp"
#include "clause/serialize.hpp"
#include "clause/store.hpp"

namespace httplib {
class Server;
}

namespace clause {

struct ApiResponse {
  int status = 200;
  json body;
};

int http_status(ErrorCode code);

// Error body: {"error": {code, message, details}} plus "violations" for
// ViolationsOutstanding.
json error_json(const Error& e, const GenericDocument* g = nullptr, const DocumentInstance* inst = nullptr);

json summary_json(const InstanceSummary& s);

// Violations annotated with their suggested remedies.
json violations_json(const std::vector<Violation>& vs, const GenericDocument& g, const DocumentInstance& inst);

// Request handling shared by the CLI (--json) and the HTTP service. Every
// method catches engine errors and turns them into a status and body.
class Api {
 public:
  explicit Api(Store& store, std::string id_prefix = "Q");

  ApiResponse list_generics();
  ApiResponse get_generic(const std::string& doc_type);
  ApiResponse start_session(const json& body);  // {"doc_type", "display_name"?}
  ApiResponse get_session(const std::string& id);
  ApiResponse post_edit(const std::string& id, const json& body);
  ApiResponse check(const std::string& id);
  ApiResponse finalize(const std::string& id);
  ApiResponse query(const std::vector<std::pair<std::string, std::string>>& params);
  ApiResponse get_instance(const std::string& id);
  ApiResponse render(const std::string& id, const std::string& format);

  Store& store() { return store_; }
  Drafter& drafter() { return drafter_; }

 private:
  Store& store_;
  Drafter drafter_;
};

// Routes under /api. Bodies are JSON; malformed bodies get 400.
std::unique_ptr<httplib::Server> make_server(Api& api);

}  // namespace clause
