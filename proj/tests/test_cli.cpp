#include "doctest.h"

#include "sheafq/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace sheafq;
namespace fs = std::filesystem;

namespace {

const fs::path kTexas = fs::path(SHEAFQ_FIXTURES) / "texas_like";

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "sheafq_test_cli";
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(SHEAFQ_CLI) + " " + args + " > " + out.string() + " 2> " +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  return o;
}

}  // namespace

TEST_CASE("verify one property") {
  const auto o = run("verify --property stability_wall");
  CHECK(o.code == 0);
  const Json j = Json::parse(o.out);
  REQUIRE(j.is_array());
  CHECK(j[0]["property"] == "stability_wall");
  CHECK(j[0]["passed"] == true);
  CHECK(run("verify --property nonsense").code != 0);
}

TEST_CASE("malformed dataset exits with the parse code") {
  const fs::path dir = scratch() / "bad";
  fs::create_directories(dir);
  std::ofstream(dir / "edges.tsv") << "0\t1\n";
  std::ofstream(dir / "features.csv") << "1,0\nx,1\n";
  std::ofstream(dir / "labels.csv") << "0\n1\n";
  std::ofstream(dir / "splits.json") << R"({"splits": [{"train": [0], "val": [1], "test": []}]})";
  CHECK(run("inspect-dataset " + dir.string()).code == 2);
  CHECK(run("train --data " + dir.string()).code == 2);
}

TEST_CASE("gen-synth then inspect-dataset agree") {
  const fs::path dir = scratch() / "synth";
  fs::remove_all(dir);
  const auto gen = run("gen-synth --n-per-block 12 --p-intra 0.3 --p-inter 0.4 --seed 3 --out " + dir.string());
  REQUIRE(gen.code == 0);
  const Json manifest = Json::parse(gen.out);
  const auto o = run("inspect-dataset " + dir.string());
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  CHECK(j["manifest_match"] == true);
  CHECK(j["nodes"] == 24);
  CHECK(j["edges"] == manifest["edges"]);
}

TEST_CASE("train on the Texas-like fixture") {
  const auto o = run("train --data " + kTexas.string() + " --epochs 20 --patience 10");
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  const double acc = j["test_acc"];
  CHECK(acc >= 0.0);
  CHECK(acc <= 1.0);
  CHECK(run("train --data " + kTexas.string() + " --epochs 5 --format csv").code == 0);
}

TEST_CASE("diffuse and moment") {
  const fs::path sheaf = scratch() / "sheaf.json";
  std::ofstream(sheaf) << R"({"graph": {"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]},
    "d_v": 1, "d_e": 1, "maps": {"a|a,b": [1], "b|a,b": [1], "b|b,c": [1], "c|b,c": [2]}})";

  const auto d = run("diffuse --sheaf " + sheaf.string() + " --mode spectral --time 50");
  REQUIRE(d.code == 0);
  const Json dj = Json::parse(d.out);
  CHECK(dj.contains("state"));

  CHECK(run("diffuse --sheaf " + sheaf.string() + " --mode euler --step 50 --layers 400").code == 3);

  const auto m = run("moment --sheaf " + sheaf.string());
  REQUIRE(m.code == 0);
  const Json mj = Json::parse(m.out);
  CHECK(std::abs(mj["trace_sum"].get<double>()) <= 1e-12);
  CHECK(run("moment --sheaf " + (scratch() / "missing.json").string()).code != 0);
}
