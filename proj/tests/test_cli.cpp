#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string tmp_path(const std::string& name) {
  return std::string("/tmp/exdir_cli_") + name;
}

int run(const std::string& args) {
  std::string cmd = std::string(EXDIR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen writes deterministic edge lists") {
  std::string a = tmp_path("gen_a.txt"), b = tmp_path("gen_b.txt");
  REQUIRE(run("gen random-dregular -n 64 -d 8 --seed 7 --out " + a) == 0);
  REQUIRE(run("gen random-dregular -n 64 -d 8 --seed 7 --out " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());

  std::string c = tmp_path("gen_c.txt");
  REQUIRE(run("gen bidirected-clique -n 4 --out " + c) == 0);
  CHECK(slurp(c).substr(0, 4) == "4 12");
  REQUIRE(run("gen directed-cycle -n 5 --out " + c) == 0);
  CHECK(slurp(c).substr(0, 3) == "5 5");
  CHECK(run("gen no-such-generator") == 2);
}

TEST_CASE("decompose then verify round trips with exit 0") {
  std::string graph = tmp_path("two.txt"), json = tmp_path("two.json");
  REQUIRE(run("gen two-communities -n 8 -d 4 --cross 1 --seed 3 --out " + graph) == 0);
  REQUIRE(run("decompose -i " + graph + " --phi 1/12 --oracle brute --out " + json) == 0);
  CHECK(run("verify -i " + graph + " --decomposition " + json) == 0);

  SUBCASE("tampered E^r makes verify exit 1") {
    std::string text = slurp(json);
    size_t pos = text.find("\"e_r\": [");
    REQUIRE(pos != std::string::npos);
    // empty the e_r array (keeps valid JSON whatever its contents)
    size_t close = text.find(']', pos);
    REQUIRE(close != std::string::npos);
    std::string tampered = text.substr(0, pos) + "\"e_r\": []" + text.substr(close + 1);
    std::ofstream(tmp_path("tampered.json")) << tampered;
    CHECK(run("verify -i " + graph + " --decomposition " + tmp_path("tampered.json")) == 1);
  }
}

TEST_CASE("floats are rejected as rationals") {
  std::string graph = tmp_path("k4.txt");
  REQUIRE(run("gen bidirected-clique -n 4 --out " + graph) == 0);
  CHECK(run("decompose -i " + graph + " --phi 0.1") == 2);
}

TEST_CASE("prune runs a stream with inline verification") {
  std::string graph = tmp_path("pr.txt"), dels = tmp_path("pr.del");
  REQUIRE(run("gen bidirected-clique -n 6 --out " + graph) == 0);
  {
    std::ofstream d(dels);
    d << "# first few edges\n0\n5\n9\n";
  }
  CHECK(run("prune -i " + graph + " --deletions " + dels +
            " --phi 1/10 --oracle brute --verify --out " + tmp_path("pr.jsonl")) == 0);
  CHECK(!slurp(tmp_path("pr.jsonl")).empty());

  SUBCASE("dead edge in the stream is an input error") {
    {
      std::ofstream d(dels);
      d << "0\n0\n";
    }
    CHECK(run("prune -i " + graph + " --deletions " + dels + " --phi 1/10 --oracle brute") ==
          2);
  }
}

TEST_CASE("missing input file reports a usage error") {
  CHECK(run("decompose -i /nonexistent/graph.txt --phi 1/8") == 2);
}
