#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>
#include <string>
#include <string_view>

#include "note_forge/emr.hpp"
#include "note_forge/time.hpp"

namespace nf_test {

inline std::filesystem::path fixtures_dir() { return NF_FIXTURES_DIR; }
inline std::filesystem::path test_data_dir() { return NF_TEST_DATA_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open test file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline note_forge::Timestamp ts(std::string_view text) {
  auto t = note_forge::parse_timestamp(text);
  if (!t) throw std::invalid_argument("bad timestamp in test: " + std::string(text));
  return *t;
}

inline note_forge::Date date(std::string_view text) {
  auto d = note_forge::parse_date(text);
  if (!d) throw std::invalid_argument("bad date in test: " + std::string(text));
  return *d;
}

inline note_forge::Timestamp plus_hours(note_forge::Timestamp t, double hours) {
  return {t.seconds + static_cast<std::int64_t>(hours * 3600)};
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(std::string_view tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("nf-" + std::string(tag) + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace nf_test
