#include "clause/drafter.hpp"

#include <random>

namespace clause {

std::string random_session_id() {
  static thread_local std::random_device rd;
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 4; ++i) {
    std::uint32_t word = rd();
    for (int k = 0; k < 8; ++k, word >>= 4) out.push_back(hex[word & 0xF]);
  }
  return out;
}

Drafter::Drafter(Store& store, std::string id_prefix) : store_(store), prefix_(std::move(id_prefix)) {}

std::mutex& Drafter::session_mutex(std::string_view id) {
  std::lock_guard lock(table_mutex_);
  auto it = session_mutexes_.find(id);
  if (it == session_mutexes_.end())
    it = session_mutexes_.emplace(std::string(id), std::make_unique<std::mutex>()).first;
  return *it->second;
}

Session Drafter::start_session(std::string_view doc_type, std::string display_name) {
  GenericDocument g = store_.get_generic(doc_type);
  Session s = new_session(g, random_session_id(), store_.allocate_instance_id(prefix_));
  if (!display_name.empty()) s = clause::apply_edit(g, s, edit::SetDisplayName{display_name}, now_timestamp()).session;
  store_.put_session(s);
  return s;
}

Session Drafter::get_session(std::string_view session_id) const { return store_.get_session(session_id); }

EditOutcome Drafter::apply_edit(std::string_view session_id, Edit e) {
  std::lock_guard lock(session_mutex(session_id));
  Session s = store_.get_session(session_id);
  GenericDocument g = store_.get_generic(s.doc_type);
  if (auto* cv = std::get_if<edit::CreateVersion>(&e)) {
    if (s.stage == Stage::Finalized) throw Error(ErrorCode::EditRejected, "session is finalized");
    const UnitTemplate* u = find_unit(g, cv->path);
    if (!u) throw Error(ErrorCode::EditRejected, "unknown unit '" + cv->path.str() + "'");
    if (!u->atomic()) throw Error(ErrorCode::EditRejected, "'" + cv->path.str() + "' has no text versions");
    std::string stamp = now_timestamp();
    auto today = Date::parse_iso(stamp.substr(0, 10));
    auto [next, number] = store_.append_version(
        s.doc_type, cv->path, NewVersion{cv->text, cv->params, cv->commentary, cv->author, today.value_or(Date{})});
    cv->assigned = number;
    g = std::move(next);
  }
  EditOutcome out = clause::apply_edit(g, std::move(s), e, now_timestamp());
  store_.put_session(out.session);
  return out;
}

std::vector<Violation> Drafter::check(std::string_view session_id) const {
  Session s = store_.get_session(session_id);
  return check_session(store_.get_generic(s.doc_type), s);
}

DocumentInstance Drafter::finalize(std::string_view session_id) {
  std::lock_guard lock(session_mutex(session_id));
  Session s = store_.get_session(session_id);
  GenericDocument g = store_.get_generic(s.doc_type);
  DocumentInstance inst = finalize_session(g, s);
  store_.put_instance(inst);
  store_.put_session(s);
  return inst;
}

}  // namespace clause
