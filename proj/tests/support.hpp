#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "crisis/event_store.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return CRISIS_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }
inline std::filesystem::path cli_path() { return CRISIS_CLI_PATH; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> serial{0};
    path_ = std::filesystem::temp_directory_path() /
            ("crisis_test_" + std::to_string(::getpid()) + "_" + std::to_string(serial++));
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

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline crisis::BlogRecord blog(const std::string& id, crisis::Timestamp ts, std::uint64_t followers = 100,
                               bool original = true) {
  crisis::BlogRecord b;
  b.id = id;
  b.timestamp = ts;
  b.text = "text of " + id;
  b.author.follower_count = followers;
  b.author.attention_count = 10;
  b.author.grade = 2;
  b.author.historical_blog_count = 50;
  b.is_original = original;
  return b;
}

inline crisis::CommentRecord comment(const std::string& id, const std::string& parent, crisis::Timestamp ts,
                                     std::uint64_t responses = 0) {
  crisis::CommentRecord c;
  c.id = id;
  c.parent_blog_id = parent;
  c.timestamp = ts;
  c.text = "reply " + id;
  c.response_count = responses;
  return c;
}

inline crisis::SnapshotStats snapshot(crisis::Timestamp ts, std::uint64_t reads, std::uint64_t discussions) {
  crisis::SnapshotStats s;
  s.timestamp = ts;
  s.total_reads = reads;
  s.total_discussions = discussions;
  return s;
}

}  // namespace testing_support
