#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace bosonq {

std::string tool_version();

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// An output directory whose files are all listed, with their hashes, in
/// manifest.json.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// Writes `name` (relative, may contain subdirectories) and records it.
  void write(const std::string& name, const std::string& content);

  template <typename Fn>
  void write_with(const std::string& name, Fn&& writer) {
    std::ostringstream os;
    writer(os);
    write(name, os.str());
  }

  void write_json(const std::string& name, const nlohmann::json& j) { write(name, j.dump(2) + "\n"); }

  const std::vector<std::string>& files() const { return files_; }

  /// Config echo, tool version, start time, wall-clock seconds and the hash of
  /// every file written so far.
  void write_manifest(const std::string& command, const nlohmann::json& config, const std::string& started_utc,
                      double wall_seconds) const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
  std::vector<std::string> hashes_;
  std::vector<std::size_t> sizes_;
};

/// Current time as an ISO-8601 UTC string.
std::string utc_timestamp();

}  // namespace bosonq
