#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "clause/session.hpp"
#include "clause/store.hpp"

namespace clause {

// Store-backed drafting sessions. Edits to one session are serialized;
// distinct sessions run concurrently.
class Drafter {
 public:
  explicit Drafter(Store& store, std::string id_prefix = "Q");

  // Throws UnknownDocType.
  Session start_session(std::string_view doc_type, std::string display_name = "");
  Session get_session(std::string_view session_id) const;

  // CreateVersion appends to the stored generic first, then logs the edit
  // with the number it was given.
  EditOutcome apply_edit(std::string_view session_id, Edit e);
  std::vector<Violation> check(std::string_view session_id) const;

  // Persists the final instance, then the finalized session. Throws
  // ViolationsOutstanding without writing anything.
  DocumentInstance finalize(std::string_view session_id);

  Store& store() { return store_; }

 private:
  std::mutex& session_mutex(std::string_view id);

  Store& store_;
  std::string prefix_;
  std::mutex table_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> session_mutexes_;
};

std::string random_session_id();

}  // namespace clause
