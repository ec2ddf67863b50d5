#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "openrabi/io.hpp"

using namespace openrabi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("openrabi_io_test_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("atomic write creates the file with exact content", "[io]") {
  TempDir tmp;
  const fs::path f = tmp.path / "out.txt";
  write_file_atomic(f, "hello\nworld\n");
  REQUIRE(slurp(f) == "hello\nworld\n");
}

TEST_CASE("atomic write replaces existing content and leaves no temporaries",
          "[io]") {
  TempDir tmp;
  const fs::path f = tmp.path / "out.txt";
  write_file_atomic(f, "first");
  write_file_atomic(f, "second");
  REQUIRE(slurp(f) == "second");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(tmp.path)) {
    (void)e;
    ++entries;
  }
  REQUIRE(entries == 1);
}

TEST_CASE("atomic write creates missing parent directories", "[io]") {
  TempDir tmp;
  const fs::path f = tmp.path / "a" / "b" / "out.txt";
  write_file_atomic(f, "nested");
  REQUIRE(slurp(f) == "nested");
}

TEST_CASE("atomic write reports unwritable destinations", "[io]") {
  TempDir tmp;
  const fs::path blocker = tmp.path / "file";
  write_file_atomic(blocker, "x");
  // Parent path is a regular file: the temporary cannot be opened.
  REQUIRE_THROWS_AS(write_file_atomic(blocker / "child.txt", "y"), IoFailure);
  REQUIRE_THROWS_AS(write_file_atomic(fs::path{}, "y"), IoFailure);
}

TEST_CASE("json round-trip through atomic write", "[io]") {
  TempDir tmp;
  const fs::path f = tmp.path / "data.json";
  const json j = {{"alpha", 1.5}, {"list", {1, 2, 3}}, {"name", "run"}};
  write_json_atomic(f, j);
  REQUIRE(read_json_file(f) == j);
}

TEST_CASE("json reader reports missing and malformed files", "[io]") {
  TempDir tmp;
  REQUIRE_THROWS_AS(read_json_file(tmp.path / "absent.json"), IoFailure);
  const fs::path bad = tmp.path / "bad.json";
  write_file_atomic(bad, "{not valid json");
  REQUIRE_THROWS_AS(read_json_file(bad), IoFailure);
}

TEST_CASE("csv document assembly", "[io]") {
  REQUIRE(csv_document("a,b", {"1,2", "3,4"}) == "a,b\n1,2\n3,4\n");
  REQUIRE(csv_document("a,b", {}) == "a,b\n");
}
