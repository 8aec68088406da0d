#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "drift/sha256.hpp"

namespace drift_test {

inline std::string fixture_path(const std::string& rel) {
  return std::string(DRIFT_TEST_DIR) + "/fixtures/" + rel;
}

inline std::string golden_path(const std::string& rel) {
  return std::string(DRIFT_TEST_DIR) + "/golden/" + rel;
}

// Fresh scratch directory under the ctest working directory.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = (std::filesystem::current_path() / "test_tmp" / name).string();
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& rel) const { return path_ + "/" + rel; }

 private:
  std::string path_;
};

// relpath -> sha256 for every regular file under root.
inline std::map<std::string, std::string> tree_digests(const std::string& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = std::filesystem::relative(entry.path(), root).string();
    out[rel] = drift::sha256_file_hex(entry.path().string());
  }
  return out;
}

}  // namespace drift_test
