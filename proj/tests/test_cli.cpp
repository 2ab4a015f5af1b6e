#include <doctest.h>

#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include "efx/cli_runner.hpp"
#include "efx/instance.hpp"

using namespace efx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("efx_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int counter;
};
int TempDir::counter = 0;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen is deterministic and parses back") {
  TempDir tmp;
  std::vector<std::string> args = {"gen",           "--types", "4",
                                   "--sizes",       "2,2,2,2", "--goods",
                                   "12",            "--seed",  "42",
                                   "--max-value",   "20",      "--out",
                                   tmp.file("a.json")};
  CHECK(run_cli(args) == 0);
  args.back() = tmp.file("b.json");
  CHECK(run_cli(args) == 0);
  CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));

  Instance inst = Instance::load(tmp.file("a.json"));
  CHECK(inst.k() == 4);
  CHECK(inst.n() == 8);
  CHECK(inst.m() == 12);
}

TEST_CASE("gen rejects inconsistent shapes") {
  TempDir tmp;
  CHECK(run_cli({"gen", "--types", "3", "--sizes", "1,1", "--goods", "4",
                 "--seed", "1", "--out", tmp.file("x.json")}) == 2);
}

TEST_CASE("solve fewtypes, then verify round-trips") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "3", "--sizes", "2,1,2", "--goods", "10",
                   "--seed", "7", "--out", tmp.file("inst.json")}) == 0);
  CHECK(run_cli({"solve", "--algo", "fewtypes", "--input",
                 tmp.file("inst.json"), "--out", tmp.file("alloc.json"),
                 "--cert", tmp.file("cert.json"), "--trace",
                 tmp.file("trace.jsonl")}) == 0);
  CHECK(run_cli({"verify", "--alpha", "2/3", "--instance",
                 tmp.file("inst.json"), "--allocation",
                 tmp.file("alloc.json")}) == 0);
  CHECK(run_cli({"replay", "--trace", tmp.file("trace.jsonl"), "--instance",
                 tmp.file("inst.json")}) == 0);

  // determinism: the same solve writes identical bytes
  CHECK(run_cli({"solve", "--algo", "fewtypes", "--input",
                 tmp.file("inst.json"), "--out", tmp.file("alloc2.json"),
                 "--cert", tmp.file("cert2.json"), "--trace",
                 tmp.file("trace2.jsonl")}) == 0);
  CHECK(slurp(tmp.file("alloc.json")) == slurp(tmp.file("alloc2.json")));
  CHECK(slurp(tmp.file("trace.jsonl")) == slurp(tmp.file("trace2.jsonl")));
}

TEST_CASE("solve charity with epsilon") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "5", "--sizes", "1,2,1,2,1", "--goods",
                   "15", "--seed", "3", "--out", tmp.file("inst.json")}) == 0);
  CHECK(run_cli({"solve", "--algo", "charity", "--epsilon", "1/4", "--input",
                 tmp.file("inst.json"), "--out", tmp.file("alloc.json"),
                 "--cert", tmp.file("cert.json")}) == 0);
  CHECK(run_cli({"verify", "--alpha", "3/4", "--charity", "--epsilon", "1/4",
                 "--instance", tmp.file("inst.json"), "--allocation",
                 tmp.file("alloc.json")}) == 0);
  // missing epsilon is a usage error
  CHECK(run_cli({"solve", "--algo", "charity", "--input",
                 tmp.file("inst.json")}) == 2);
}

TEST_CASE("solve rejects more types than fewtypes handles") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "5", "--sizes", "1,1,1,1,1", "--goods",
                   "8", "--seed", "9", "--out", tmp.file("inst.json")}) == 0);
  CHECK(run_cli({"solve", "--algo", "fewtypes", "--input",
                 tmp.file("inst.json")}) == 2);
}

TEST_CASE("verify flags a broken partition as bad input") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "1", "--sizes", "2", "--goods", "3",
                   "--seed", "5", "--out", tmp.file("inst.json")}) == 0);
  std::ofstream(tmp.file("bad.json"))
      << R"({"bundles": [[0, 1], [1]], "pool": [2]})";
  CHECK(run_cli({"verify", "--alpha", "1", "--instance", tmp.file("inst.json"),
                 "--allocation", tmp.file("bad.json")}) == 2);
  // a failing certificate is exit 1, not 2
  std::ofstream(tmp.file("skew.json"))
      << R"({"bundles": [[], [0, 1, 2]], "pool": []})";
  CHECK(run_cli({"verify", "--alpha", "1", "--instance", tmp.file("inst.json"),
                 "--allocation", tmp.file("skew.json")}) == 1);
}

TEST_CASE("decimal rationals are rejected helpfully") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "1", "--sizes", "1", "--goods", "3",
                   "--seed", "5", "--out", tmp.file("inst.json")}) == 0);
  CHECK(run_cli({"verify", "--alpha", "0.5", "--instance",
                 tmp.file("inst.json"), "--allocation",
                 tmp.file("inst.json")}) == 2);
}

TEST_CASE("oracle subcommand searches and reports") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "2", "--sizes", "1,1", "--goods", "5",
                   "--seed", "11", "--out", tmp.file("inst.json")}) == 0);
  CHECK(run_cli({"oracle", "--alpha", "2/3", "--complete", "--input",
                 tmp.file("inst.json"), "--jobs", "2", "--out",
                 tmp.file("oracle.json")}) == 0);
  CHECK(slurp(tmp.file("oracle.json")).find("\"found\": true") !=
        std::string::npos);
}

TEST_CASE("replay exits 1 on a tampered trace") {
  TempDir tmp;
  REQUIRE(run_cli({"gen", "--types", "2", "--sizes", "2,2", "--goods", "10",
                   "--seed", "21", "--out", tmp.file("inst.json")}) == 0);
  REQUIRE(run_cli({"solve", "--algo", "fewtypes", "--input",
                   tmp.file("inst.json"), "--trace",
                   tmp.file("trace.jsonl")}) == 0);
  std::string text = slurp(tmp.file("trace.jsonl"));
  auto pos = text.find("\"S");
  REQUIRE(pos != std::string::npos);
  text[pos + 2] = 'X';
  std::ofstream(tmp.file("tampered.jsonl")) << text;
  CHECK(run_cli({"replay", "--trace", tmp.file("tampered.jsonl"), "--instance",
                 tmp.file("inst.json")}) == 1);
}

TEST_CASE("unknown subcommand or flags exit 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"solve", "--algo", "nonsense", "--input", "missing.json"}) ==
        2);
}

}  // TEST_SUITE cli
