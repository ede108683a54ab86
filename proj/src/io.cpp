#include "bosonq/io.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>

#include <openssl/evp.h>

#include "bosonq/types.hpp"

#ifndef BOSONQ_VERSION
#define BOSONQ_VERSION "0.0.0"
#endif

namespace bosonq {

std::string tool_version() { return BOSONQ_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw ValidationError("cannot create output directory '" + root_.string() + "': " + ec.message());
}

void OutputDir::write(const std::string& name, const std::string& content) {
  const auto path = root_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < files_.size(); ++i) {
    if (files_[i] == name) {
      hashes_[i] = sha256_hex(content);
      sizes_[i] = content.size();
      return;
    }
  }
  files_.push_back(name);
  hashes_.push_back(sha256_hex(content));
  sizes_.push_back(content.size());
}

void OutputDir::write_manifest(const std::string& command, const nlohmann::json& config,
                               const std::string& started_utc, double wall_seconds) const {
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < files_.size(); ++i) {
    files.push_back({{"path", files_[i]}, {"sha256", hashes_[i]}, {"bytes", sizes_[i]}});
  }
  const nlohmann::json manifest{{"tool", "bosonq"},
                                {"version", tool_version()},
                                {"command", command},
                                {"started_utc", started_utc},
                                {"wall_clock_s", wall_seconds},
                                {"config", config},
                                {"files", files}};
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw ValidationError("cannot write manifest in '" + root_.string() + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace bosonq
