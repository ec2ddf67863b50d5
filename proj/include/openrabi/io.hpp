// File persistence helpers shared by the command-line tools: atomic
// whole-file writes (temporary file + rename, so partially written outputs
// are never observable), CSV assembly, and JSON file round-trips.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openrabi/errors.hpp"

namespace openrabi {

using json = nlohmann::json;

namespace iodetail {

inline std::string unique_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  return "." + std::to_string(counter.fetch_add(1)) + ".tmp";
}

}  // namespace iodetail

// Writes content to path through a same-directory temporary file followed by
// an atomic rename.  Parent directories are created on demand.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.empty()) throw IoFailure("empty output path");
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    // A failure here surfaces as an open failure below.
  }
  const fs::path tmp = path.string() + iodetail::unique_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open temporary file " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoFailure("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoFailure("cannot rename into place: " + path.string());
  }
}

inline void write_json_atomic(const std::filesystem::path& path,
                              const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoFailure("cannot parse " + path.string() + ": " + e.what());
  }
  return j;
}

// Joins CSV lines (header first) with trailing newline.
inline std::string csv_document(const std::string& header,
                                const std::vector<std::string>& rows) {
  std::ostringstream out;
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  return out.str();
}

}  // namespace openrabi
