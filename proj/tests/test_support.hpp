#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>

#include "percept/corpus.hpp"

namespace percept::testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("percept-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline AnnotationRecord record(const std::string& annotator, const std::string& doc,
                               std::map<std::string, int> ratings) {
  AnnotationRecord r;
  r.annotator_id = annotator;
  r.doc_id = doc;
  r.ratings = std::move(ratings);
  return r;
}

}  // namespace percept::testing
