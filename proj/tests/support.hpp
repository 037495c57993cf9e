#pragma once

#include "netgen/random.hpp"
#include "netgen/tensor.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>

namespace testing {

inline netgen::Matrix random_matrix(netgen::Index rows, netgen::Index cols, netgen::Rng& rng, double scale = 1.0) {
  netgen::Matrix m(rows, cols);
  for (netgen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * netgen::normal(rng);
  return m;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("netgen_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

}  // namespace testing
