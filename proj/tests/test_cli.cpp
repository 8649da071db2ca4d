#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "cardest/cli.hpp"

namespace fs = std::filesystem;
using cardest::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string dir(const std::string& name) {
  const fs::path p = fs::path(CARDEST_TEST_TMP) / name;
  fs::remove_all(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("argument errors") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({"simulate", "--no-such-flag"}).code == 2);
  CHECK(cli({"simulate", "--n", "500", "-o", dir("bad")}).code == 2);
  CHECK(cli({"simulate", "--erasure", "abc", "-o", dir("bad")}).code == 2);
  const auto missing = cli({"simulate", "--config", "/nonexistent/cfg.txt", "-o", dir("bad")});
  CHECK(missing.code == 3);
  CHECK(missing.err.find("cfg.txt") != std::string::npos);
  CHECK(cli({"sweep", "fig9", "-o", dir("bad")}).code == 2);
  CHECK(cli({"topology", "-o", dir("bad")}).code == 2);
  CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("simulate is reproducible") {
  const auto a = dir("sim_a"), b = dir("sim_b"), c = dir("sim_c");
  const std::vector<std::string> common{"simulate", "--trials", "40", "--seed", "11", "--rounds", "3"};
  auto args = common;
  args.insert(args.end(), {"-o", a, "--trace"});
  REQUIRE(cli(args).code == 0);
  args = common;
  args.insert(args.end(), {"-o", b, "--jobs", "2"});
  REQUIRE(cli(args).code == 0);
  const auto est = slurp(fs::path(a) / "estimates.csv");
  CHECK(est == slurp(fs::path(b) / "estimates.csv"));
  const auto rows = lines(est);
  REQUIRE(rows.size() == 41);
  CHECK(rows[0] == "seed,n,n_max,K,t,f_initial,q,regime,z_count,alpha_product,n_hat");
  CHECK(rows[1].rfind("11,300,350,35,3,0.5,0.1,t_infinity,", 0) == 0);
  CHECK(fs::exists(fs::path(a) / "trace.csv"));

  // The manifest alone reproduces the run.
  REQUIRE(cli({"simulate", "--config", (fs::path(a) / "manifest.txt").string(), "-o", c}).code == 0);
  CHECK(slurp(fs::path(c) / "estimates.csv") == est);
  const auto manifest = slurp(fs::path(a) / "manifest.txt");
  CHECK(manifest.find("# tool_version=0.1.0") != std::string::npos);
  CHECK(manifest.find("# base_seed=11") != std::string::npos);
}

TEST_CASE("round zero with every slot queried counts the alive nodes") {
  const auto d = dir("sim_t0");
  REQUIRE(cli({"simulate", "--rounds", "0", "--queried", "350", "--trials", "3", "-o", d}).code == 0);
  const auto rows = lines(slurp(fs::path(d) / "estimates.csv"));
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",t0,300,") != std::string::npos);
}

TEST_CASE("sweep tables") {
  SUBCASE("fig1") {
    const auto d = dir("fig1");
    REQUIRE(cli({"sweep", "fig1", "--trials", "5", "--k-grid", "10,35", "--t-grid", "2,6", "--f-grid", "0.5", "-o", d})
                .code == 0);
    const auto rows = lines(slurp(fs::path(d) / "fig1.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].rfind("K,t,F,mean_estimated,ci_lo,ci_hi", 0) == 0);
    CHECK(fs::exists(fs::path(d) / "fig1_long.csv"));
  }
  SUBCASE("fig2") {
    const auto d = dir("fig2");
    REQUIRE(cli({"sweep", "fig2", "--trials", "5", "--k-grid", "20", "--f-grid", "0.5", "-o", d}).code == 0);
    const auto rows = lines(slurp(fs::path(d) / "fig2.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].rfind("F,K,mean_time_to_95,censored_fraction", 0) == 0);
  }
  SUBCASE("fig3 and fig4") {
    const auto d = dir("fig34");
    REQUIRE(cli({"sweep", "fig3", "--trials", "5", "--t-grid", "4", "--q-grid", "0.1,0.3", "-o", d}).code == 0);
    CHECK(lines(slurp(fs::path(d) / "fig3.csv")).size() == 3);
    REQUIRE(cli({"sweep", "fig4", "--trials", "5", "--t-grid", "4,8", "--f-grid", "0.5", "-o", d}).code == 0);
    CHECK(lines(slurp(fs::path(d) / "fig4.csv")).size() == 3);
  }
  CHECK(cli({"sweep", "fig1", "--k-grid", "10,x", "-o", dir("bad")}).code == 2);
}

TEST_CASE("topology under flooding") {
  const auto d = dir("topo");
  const auto r = cli({"topology", "--topology", "true", "--f-initial", "1", "--erasure", "0", "--rounds", "40",
                      "--queried", "350", "--radius", "0.2", "-o", d});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("vertex_recall=1 edge_recall=1 false_vertices=0 false_edges=0") != std::string::npos);
  const auto report = lines(slurp(fs::path(d) / "topology_report.csv"));
  REQUIRE(report.size() == 2);
}

TEST_CASE("validate negative control") {
  const auto good = cli({"validate", "--only", "t0_mean"});
  CHECK(good.code == 0);
  CHECK(good.out.rfind("PASS t0_mean", 0) == 0);
  const auto bad = cli({"validate", "--only", "t1_mean", "--alpha1-scale", "2"});
  CHECK(bad.code == 1);
  CHECK(bad.out.rfind("FAIL t1_mean", 0) == 0);
  CHECK(cli({"validate", "--only", "nope"}).code == 2);
}
