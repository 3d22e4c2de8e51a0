#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "clause/store.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(CLAUSE_FIXTURE_DIR); }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("clause-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline clause::GenericDocument mf2() { return clause::load_generic_file(fixture_dir() / "iee-mf-2" / "generic.json"); }

inline clause::GenericDocument equipment_clause() {
  return clause::load_generic_file(fixture_dir() / "equipment-clause" / "generic.json");
}

// Both generics plus the R1, R2, R3 instances.
inline void install_fixtures(clause::Store& store) {
  store.put_generic(mf2());
  store.put_generic(equipment_clause());
  for (const char* id : {"R1", "R2", "R3"})
    store.put_instance(clause::load_instance_file(fixture_dir() / "instances" / (std::string(id) + ".json")));
}

}  // namespace testing_support
