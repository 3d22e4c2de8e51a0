#include "clause/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <regex>
#include <sstream>

#include "clause/serialize.hpp"

namespace fs = std::filesystem;

namespace clause {

namespace {

class StoreLock {
 public:
  explicit StoreLock(const fs::path& root) {
    fd_ = ::open((root / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file in " + root.string());
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        throw Error(ErrorCode::Io, "cannot lock store " + root.string());
      }
    }
  }
  ~StoreLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

json read_json(const fs::path& file) {
  std::string text = read_text(file);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, file.string() + ": " + e.what());
  }
}

bool safe_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return true;
}

std::map<std::string, std::string> read_fragments(const fs::path& dir) {
  std::map<std::string, std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    try {
      out[entry.path().stem().string()] = read_text(entry.path());
    } catch (const Error&) {
      // left out; rendering reports it as unreadable
    }
  }
  return out;
}

const std::regex kSequencedId("([A-Z]+)([0-9]+)");

std::map<std::string, long long> read_counters(const fs::path& root) {
  std::map<std::string, long long> counters;
  fs::path file = root / "store.json";
  if (!fs::exists(file)) return counters;
  json j = read_json(file);
  json stored = j.value("counters", json::object());
  for (const auto& [k, v] : stored.items()) counters[k] = v.get<long long>();
  return counters;
}

void write_counters(const fs::path& root, const std::map<std::string, long long>& counters) {
  json j = {{"schema_version", 1}, {"counters", counters}};
  write_atomic(root / "store.json", canonical(j));
}

template <typename F>
auto wrap_parse(const fs::path& file, F&& f) {
  try {
    return f(read_json(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, file.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadRequest) throw Error(ErrorCode::Io, file.string() + ": " + e.what());
    throw;
  }
}

}  // namespace

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& file, std::string_view content) {
  static std::atomic<unsigned> seq{0};
  fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(seq++);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  std::size_t done = 0;
  while (done < content.size()) {
    ssize_t n = ::write(fd, content.data() + done, content.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      fs::remove(tmp);
      throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, file);
}

Store::Store(fs::path root) : root_(std::move(root)) {
  for (const char* d : {"generics", "instances", "sessions"}) fs::create_directories(root_ / d);
}

fs::path Store::generic_dir(std::string_view doc_type) const {
  return root_ / "generics" / slugify(doc_type);
}

void Store::write_generic(const GenericDocument& g) {
  fs::path dir = generic_dir(g.doc_type);
  fs::create_directories(dir / "fragments");
  for (const auto& [id, text] : g.fragments) write_atomic(dir / "fragments" / (id + ".txt"), text);
  write_atomic(dir / "generic.json", canonical(to_json(g)));
  for (const auto& entry : fs::directory_iterator(dir / "fragments"))
    if (entry.path().extension() == ".txt" && !g.fragments.count(entry.path().stem().string()))
      fs::remove(entry.path());
}

void Store::put_generic(const GenericDocument& g) {
  ValidationReport r = validate_generic(g);
  if (!r.ok()) throw Error(ErrorCode::ValidationFailed, "generic '" + g.doc_type + "' is invalid", r.errors);
  for (const auto& [id, text] : g.fragments)
    if (!safe_id(id)) throw Error(ErrorCode::ValidationFailed, "fragment id '" + id + "' is not filesystem-safe");
  StoreLock lock(root_);
  write_generic(g);
}

GenericDocument Store::get_generic(std::string_view doc_type) const {
  fs::path dir = generic_dir(doc_type);
  fs::path file = dir / "generic.json";
  if (!fs::exists(file)) throw Error(ErrorCode::UnknownDocType, "unknown document type '" + std::string(doc_type) + "'");
  GenericDocument g = wrap_parse(file, [](const json& j) { return generic_from_json(j); });
  if (g.doc_type != doc_type)
    throw Error(ErrorCode::UnknownDocType, "unknown document type '" + std::string(doc_type) + "'");
  g.fragments = read_fragments(dir / "fragments");
  return g;
}

bool Store::has_generic(std::string_view doc_type) const {
  fs::path file = generic_dir(doc_type) / "generic.json";
  if (!fs::exists(file)) return false;
  try {
    return read_json(file).value("doc_type", "") == doc_type;
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> Store::list_generics() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / "generics")) {
    fs::path file = entry.path() / "generic.json";
    if (!fs::exists(file)) continue;
    try {
      out.push_back(read_json(file).at("doc_type").get<std::string>());
    } catch (const std::exception&) {
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::pair<GenericDocument, int> Store::append_version(std::string_view doc_type, const UnitPath& p,
                                                      NewVersion v) {
  StoreLock lock(root_);
  GenericDocument g = get_generic(doc_type);
  auto [next, number] = add_version(std::move(g), p, std::move(v));
  write_generic(next);
  return {std::move(next), number};
}

void Store::bump_counter(const std::string& id) {
  std::smatch m;
  if (!std::regex_match(id, m, kSequencedId)) return;
  auto counters = read_counters(root_);
  long long n = std::stoll(m[2].str());
  if (counters[m[1].str()] < n) {
    counters[m[1].str()] = n;
    write_counters(root_, counters);
  }
}

void Store::put_instance(const DocumentInstance& inst) {
  if (!safe_id(inst.id)) throw Error(ErrorCode::BadRequest, "instance id '" + inst.id + "' is not filesystem-safe");
  if (!has_generic(inst.doc_type))
    throw Error(ErrorCode::UnknownDocType, "unknown document type '" + inst.doc_type + "'");
  StoreLock lock(root_);
  write_atomic(root_ / "instances" / (inst.id + ".json"), canonical(to_json(inst)));
  bump_counter(inst.id);
}

DocumentInstance Store::get_instance(std::string_view id) const {
  fs::path file = root_ / "instances" / (std::string(id) + ".json");
  if (!safe_id(id) || !fs::exists(file))
    throw Error(ErrorCode::UnknownInstance, "unknown instance '" + std::string(id) + "'");
  return wrap_parse(file, [](const json& j) { return instance_from_json(j); });
}

std::vector<InstanceSummary> Store::list_instances() const {
  std::vector<InstanceSummary> out;
  std::map<std::string, std::string> categories;
  for (const auto& entry : fs::directory_iterator(root_ / "instances")) {
    if (entry.path().extension() != ".json") continue;
    DocumentInstance d;
    try {
      d = get_instance(entry.path().stem().string());
    } catch (const Error&) {
      continue;
    }
    auto it = categories.find(d.doc_type);
    if (it == categories.end()) {
      std::string cat;
      try {
        cat = get_generic(d.doc_type).category;
      } catch (const Error&) {
      }
      it = categories.emplace(d.doc_type, cat).first;
    }
    out.push_back({d.id, d.display_name, d.doc_type, it->second, d.parties, d.date, d.status});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

void Store::put_session(const Session& s) {
  if (!safe_id(s.session_id)) throw Error(ErrorCode::BadRequest, "session id is not filesystem-safe");
  StoreLock lock(root_);
  write_atomic(root_ / "sessions" / (s.session_id + ".json"), canonical(to_json(s)));
}

Session Store::get_session(std::string_view id) const {
  fs::path file = root_ / "sessions" / (std::string(id) + ".json");
  if (!safe_id(id) || !fs::exists(file))
    throw Error(ErrorCode::UnknownSession, "unknown session '" + std::string(id) + "'");
  return wrap_parse(file, [](const json& j) { return session_from_json(j); });
}

std::vector<std::string> Store::list_sessions() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / "sessions"))
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string Store::allocate_instance_id(std::string_view prefix) {
  static const std::regex kPrefix("[A-Z]+");
  std::string p(prefix);
  if (!std::regex_match(p, kPrefix)) throw Error(ErrorCode::BadRequest, "id prefix must match [A-Z]+");
  StoreLock lock(root_);
  auto counters = read_counters(root_);
  long long n = ++counters[p];
  // Skip over ids already taken by records written without allocation.
  while (fs::exists(root_ / "instances" / (p + std::to_string(n) + ".json"))) n = ++counters[p];
  write_counters(root_, counters);
  return p + std::to_string(n);
}

std::vector<Finding> Store::integrity_check() const {
  std::vector<Finding> out;
  std::map<std::string, GenericDocument> generics;
  for (const auto& entry : fs::directory_iterator(root_ / "generics")) {
    fs::path file = entry.path() / "generic.json";
    if (!fs::exists(file)) continue;
    GenericDocument g;
    try {
      g = wrap_parse(file, [](const json& j) { return generic_from_json(j); });
    } catch (const Error& e) {
      out.push_back({"unreadable_record", file.string(), e.what()});
      continue;
    }
    for (const auto& p : atomic_units(g)) {
      for (const auto& v : resolve_unit(g, p).versions) {
        fs::path frag = entry.path() / "fragments" / (v.fragment + ".txt");
        if (!fs::is_regular_file(frag))
          out.push_back({"dangling_fragment", g.doc_type + ":" + p.str() + "@" + std::to_string(v.number),
                         "fragment '" + v.fragment + "' is missing"});
      }
    }
    generics[g.doc_type] = std::move(g);
  }

  std::map<std::string, long long> counters;
  try {
    counters = read_counters(root_);
  } catch (const Error& e) {
    out.push_back({"unreadable_record", (root_ / "store.json").string(), e.what()});
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root_ / "instances"))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    DocumentInstance d;
    try {
      d = wrap_parse(file, [](const json& j) { return instance_from_json(j); });
    } catch (const Error& e) {
      out.push_back({"unreadable_record", file.string(), e.what()});
      continue;
    }
    auto git = generics.find(d.doc_type);
    if (git == generics.end()) {
      out.push_back({"unknown_doc_type", d.id, "document type '" + d.doc_type + "' is not stored"});
    } else {
      for (const auto& [p, v] : d.selections) {
        const UnitTemplate* u = find_unit(git->second, p);
        if (!u || !u->atomic())
          out.push_back({"bad_unit", d.id, "selection names unknown unit '" + p.str() + "'"});
        else if (!u->find_version(v))
          out.push_back({"bad_version", d.id, "'" + p.str() + "' has no version " + std::to_string(v)});
      }
    }
    std::smatch m;
    std::string id = d.id;
    if (std::regex_match(id, m, kSequencedId)) {
      long long n = std::stoll(m[2].str());
      auto c = counters.find(m[1].str());
      if (c == counters.end() || c->second < n)
        out.push_back({"counter_behind", d.id, "counter for prefix '" + m[1].str() + "' is below " + std::to_string(n)});
    }
  }

  for (const auto& entry : fs::directory_iterator(root_ / "sessions")) {
    if (entry.path().extension() != ".json") continue;
    try {
      wrap_parse(entry.path(), [](const json& j) { return session_from_json(j); });
    } catch (const Error& e) {
      out.push_back({"unreadable_record", entry.path().string(), e.what()});
    }
  }
  return out;
}

GenericDocument load_generic_file(const fs::path& file) {
  json j = wrap_parse(file, [](const json& x) { return x; });
  GenericDocument g;
  try {
    g = generic_from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, file.string() + ": " + e.what());
  }
  if (!j.contains("fragments")) g.fragments = read_fragments(file.parent_path() / "fragments");
  return g;
}

DocumentInstance load_instance_file(const fs::path& file) {
  try {
    return instance_from_json(read_json(file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadRequest, file.string() + ": " + e.what());
  }
}

}  // namespace clause
