#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clause/document.hpp"
#include "clause/session.hpp"

namespace clause {

struct InstanceSummary {
  std::string id;
  std::string display_name;
  std::string doc_type;
  std::string category;
  std::array<Party, 2> parties;
  std::optional<Date> date;
  InstanceStatus status = InstanceStatus::Draft;

  bool operator==(const InstanceSummary&) const = default;
};

struct Finding {
  std::string kind;  // dangling_fragment, unknown_doc_type, bad_unit, bad_version, counter_behind, unreadable_record
  std::string subject;
  std::string message;
};

// Directory-backed store:
//   generics/<slug>/generic.json, generics/<slug>/fragments/<id>.txt
//   instances/<id>.json, sessions/<id>.json, store.json (id counters)
// Every file is replaced by write-then-rename; writers hold an exclusive
// flock on <root>/.lock.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Throws ValidationFailed (details: the validation errors) and leaves the
  // store untouched.
  void put_generic(const GenericDocument& g);
  GenericDocument get_generic(std::string_view doc_type) const;
  bool has_generic(std::string_view doc_type) const;
  std::vector<std::string> list_generics() const;

  // Appends a version under the store lock so concurrent creators on one
  // unit get distinct consecutive numbers. Returns the updated generic.
  std::pair<GenericDocument, int> append_version(std::string_view doc_type, const UnitPath& p,
                                                 NewVersion v);

  void put_instance(const DocumentInstance& inst);
  DocumentInstance get_instance(std::string_view id) const;
  std::vector<InstanceSummary> list_instances() const;

  void put_session(const Session& s);
  Session get_session(std::string_view id) const;
  std::vector<std::string> list_sessions() const;

  // prefix must match [A-Z]+. Returns prefix + next sequence number.
  std::string allocate_instance_id(std::string_view prefix);

  std::vector<Finding> integrity_check() const;

 private:
  std::filesystem::path generic_dir(std::string_view doc_type) const;
  void write_generic(const GenericDocument& g);
  void bump_counter(const std::string& id);

  std::filesystem::path root_;
};

// A generic bundle file: generic JSON with either an inline "fragments"
// object or a fragments/ directory next to the file.
GenericDocument load_generic_file(const std::filesystem::path& file);
DocumentInstance load_instance_file(const std::filesystem::path& file);

std::string read_text(const std::filesystem::path& file);
void write_atomic(const std::filesystem::path& file, std::string_view content);

}  // namespace clause
