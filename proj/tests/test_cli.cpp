#include <doctest.h>

#include <sys/wait.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "balrisk/cli.hpp"
#include "balrisk/data.hpp"
#include "balrisk/table.hpp"

using namespace balrisk;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("balrisk_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string strip_comments(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, body;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') body += line + "\n";
  return body;
}

}  // namespace

TEST_CASE("gen then knn-predict") {
  TempDir dir;
  std::string data = dir.file("d.bin"), query = dir.file("q.csv");
  auto g = cli({"gen", "--n", "1000", "--a", "0.5", "--seed", "7", "--out", data});
  REQUIRE(g.code == 0);
  auto loaded = read_cache(data);
  CHECK(loaded.size() == 1000);
  CHECK(loaded.dim() == 2);
  write(query, "x1,x2\n0,0\n1,1\n5,5\n-3,2\n");
  auto p = cli({"knn-predict", "--train", data, "--k", "31", "--query", query});
  REQUIRE(p.code == 0);
  auto t = ResultTable::parse_csv(p.out);
  REQUIRE(t.size() == 4);
  for (std::size_t r = 0; r < t.size(); ++r) {
    double v = t.number(r, "prediction");
    CHECK((v == 1.0 || v == -1.0));
  }
  auto brute = cli({"knn-predict", "--train", data, "--k", "31", "--query", query, "--method", "brute"});
  CHECK(strip_comments(brute.out) == strip_comments(p.out));

  std::string csv = dir.file("d.csv");
  REQUIRE(cli({"gen", "--n", "1000", "--a", "0.5", "--seed", "7", "--out", csv}).code == 0);
  auto pc = cli({"knn-predict", "--train", csv, "--k", "31", "--query", query});
  REQUIRE(pc.code == 0);
  CHECK(strip_comments(pc.out) == strip_comments(p.out));
}

TEST_CASE("bounds example") {
  auto r = cli({"bounds", "--n", "1000000", "--p", "0.01", "--v", "6", "--A", "2", "--U", "1", "--B", "4",
                "--delta", "0.05", "--K", "2"});
  REQUIRE(r.code == 0);
  auto t = ResultTable::parse_csv(r.out);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.size(); ++i) names.push_back(t.text(i, "bound"));
  CHECK(names == std::vector<std::string>{"slow_rate", "slow_rate_erm", "fast_rate", "fast_slow_ratio", "p_ratio",
                                          "chernoff_lower", "chernoff_upper"});
  CHECK(t.text(0, "valid") == "true");
  CHECK(t.text(2, "valid") == "true");
  CHECK(t.number(0, "value") > 0.0);
  CHECK(t.number(2, "q") == 0.01);
  bool echoed = false;
  for (const auto& c : t.comments()) echoed |= c == "B=4.0";
  CHECK(echoed);

  auto bad = cli({"bounds", "--n", "1000", "--p", "0.01", "--sigma-plus", "3"});
  CHECK(bad.code == 0);
  auto bt = ResultTable::parse_csv(bad.out);
  CHECK(bt.text(0, "valid") == "false");
}

TEST_CASE("help on every subcommand exits 0") {
  for (std::string sub : {"gen", "knn-heatmap", "erm-curve", "bounds", "check-identity", "knn-predict"}) {
    auto r = cli({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"bounds", "--n", "abc"}).code == kExitUsage);
  CHECK(cli({"knn-predict", "--k", "3"}).code == kExitUsage);
  std::string bad = dir.file("bad.csv"), q = dir.file("q.csv");
  write(bad, "x1,x2,label\n1,2,1\n3,oops,-1\n");
  write(q, "1,2\n");
  auto r = cli({"knn-predict", "--train", bad, "--k", "1", "--query", q});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("row 3") != std::string::npos);
  CHECK(cli({"knn-predict", "--train", dir.file("missing.csv"), "--k", "1", "--query", q}).code == kExitData);
  CHECK(cli({"knn-heatmap", "--n", "100", "--a-grid", "0.9"}).code != kExitOk);
  CHECK(cli({"check-identity", "--draws", "20000", "--tolerance", "1e-9", "--seed", "3"}).code == kExitNumeric);
}

TEST_CASE("config file: flags win, unknown keys are rejected") {
  TempDir dir;
  std::string cfg = dir.file("run.cfg");
  write(cfg, "# comment\nn = 5000\np=0.02\nK = 3\n");
  auto a = cli({"bounds", "--config", cfg});
  REQUIRE(a.code == 0);
  auto ta = ResultTable::parse_csv(a.out);
  CHECK(ta.number(0, "n") == 5000.0);
  CHECK(ta.number(0, "p") == 0.02);
  CHECK(ta.number(0, "K") == 3.0);
  auto b = cli({"bounds", "--config", cfg, "--n", "7000"});
  auto tb = ResultTable::parse_csv(b.out);
  CHECK(tb.number(0, "n") == 7000.0);
  CHECK(tb.number(0, "p") == 0.02);
  bool echoed = false;
  for (const auto& c : tb.comments()) echoed |= c == "n=7000.0";
  CHECK(echoed);

  write(cfg, "n=100\nbogus_key=1\n");
  auto c = cli({"bounds", "--config", cfg});
  CHECK(c.code == kExitUsage);
  CHECK(c.err.find("bogus_key") != std::string::npos);
}

TEST_CASE("experiment commands are reproducible across thread counts") {
  std::vector<std::string> heat = {"knn-heatmap", "--n", "500", "--a-grid", "0.25,0.5", "--b-grid", "0.5",
                                   "--reps", "2", "--test-queries", "100", "--seed", "4"};
  std::vector<std::string> curve = {"erm-curve", "--n-grid", "100,200", "--reps", "4", "--oracle-draws", "5000",
                                    "--risk-draws", "2000", "--seed", "4"};
  for (const auto& base : {heat, curve}) {
    std::string first;
    for (std::string threads : {"1", "4", "8"}) {
      auto args = base;
      args.push_back("--threads");
      args.push_back(threads);
      auto r = cli(args);
      REQUIRE(r.code == 0);
      if (first.empty()) first = r.out;
      CHECK(r.out == first);
    }
  }
}

TEST_CASE("svg output") {
  TempDir dir;
  std::string svg = dir.file("h.svg");
  auto r = cli({"knn-heatmap", "--n", "300", "--a-grid", "0.25,0.5", "--b-grid", "0.25,0.5", "--reps", "1",
                "--test-queries", "50", "--svg", svg});
  REQUIRE(r.code == 0);
  std::ifstream in(svg);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.rfind("<svg", 0) == 0);
}

TEST_CASE("the installed binary runs") {
  std::string cmd = std::string("\"") + BALRISK_CLI_PATH + "\" bounds --n 1e5 --p 0.1 > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  std::string bad = std::string("\"") + BALRISK_CLI_PATH + "\" nope 2> /dev/null";
  int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 1);
}
