#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "revinsight/embed.hpp"
#include "revinsight/synthetic.hpp"

namespace helpers {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(REVINSIGHT_FIXTURES) / rel;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& data) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("revinsight-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline revinsight::embed::EmbeddingBackendConfig local_backend(std::size_t dim = 384) {
  revinsight::embed::EmbeddingBackendConfig c;
  c.kind = revinsight::embed::BackendKind::kLocalTest;
  c.local_dim = dim;
  return c;
}

inline std::vector<std::string> texts_of(const revinsight::ReviewCorpus& c) {
  std::vector<std::string> out;
  for (const auto& r : c.reviews) out.push_back(r.text);
  return out;
}

}  // namespace helpers
