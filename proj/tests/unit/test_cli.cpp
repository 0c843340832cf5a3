#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mqg/cli.hpp"
#include "mqg/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = mqg::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mqg_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  auto r = run({"bands", "--p", "2", "--q", "4"});
  CHECK(r.code == 2);
  CHECK(r.err.find("not reduced") != std::string::npos);
  CHECK(run({"prob", "--q", "0"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"bands", "--bogus"}).code == 2);
  CHECK(run({"bands", "--q", "3"}).code == 2);
  CHECK(run({"bands", "--p", "1", "--q", "2", "--grid", "-1"}).code == 2);
  CHECK(run({"bands", "--p", "1", "--q", "2", "--format", "xml"}).code == 2);
  CHECK(run({"star", "--degree", "2"}).code == 2);
}

TEST_CASE("help exits with 0") {
  auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("bands") != std::string::npos);
}

TEST_CASE("I/O failure exits with 3") {
  const fs::path dir = scratch("io");
  std::ofstream(dir / "blocker") << "x";
  auto r = run({"star", "--degree", "4", "--out", (dir / "blocker" / "star.csv").string()});
  CHECK(r.code == 3);
  fs::remove_all(dir);
}

TEST_CASE("bands with the negative regime") {
  const fs::path dir = scratch("bands");
  const auto out = (dir / "b.csv").string();
  auto r = run({"bands", "--p", "1", "--q", "2", "--kmax", "4", "--neg", "--out", out});
  REQUIRE(r.code == 0);
  std::ifstream in(out);
  const auto rows = mqg::io::read_band_csv(in);
  int negative = 0;
  for (const auto& row : rows) negative += row.regime == mqg::Regime::negative;
  CHECK(negative == 1);
  CHECK(fs::exists(dir / "b.csv.meta.json"));
  CHECK(slurp(dir / "b.csv.meta.json").find("kappa_max_caveat") != std::string::npos);

  auto j = run({"bands", "--p", "1", "--q", "2", "--kmax", "4", "--format", "json", "--out", out});
  REQUIRE(j.code == 0);
  CHECK(slurp(dir / "b.json").find("\"bands\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("output is byte-identical across runs and job counts") {
  const fs::path dir = scratch("det");
  const std::vector<std::string> base{"butterfly", "--qmax", "3", "--kmax", "4", "--neg", "--grid", "5000"};
  auto a = base;
  a.insert(a.end(), {"--jobs", "1", "--out", (dir / "a.csv").string()});
  auto b = base;
  b.insert(b.end(), {"--jobs", "3", "--out", (dir / "b.csv").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  const std::string text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv.meta.json") == slurp(dir / "b.csv.meta.json"));
  // Exactly the three ratios with q <= 3.
  std::istringstream is(text);
  std::vector<std::pair<int, int>> groups;
  for (const auto& row : mqg::io::read_band_csv(is)) {
    if (groups.empty() || groups.back() != std::make_pair(row.p, row.q)) groups.emplace_back(row.p, row.q);
  }
  CHECK(groups == std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}});
  fs::remove_all(dir);
}

TEST_CASE("butterfly SVG and asymptotic window") {
  const fs::path dir = scratch("svg");
  auto r = run({"butterfly", "--qmax", "2", "--kmax", "4", "--asymptotic", "--n", "20", "--svg", "--out",
                (dir / "f.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "f.csv"));
  CHECK(fs::exists(dir / "f.asymptotic.csv"));
  CHECK(slurp(dir / "f.asymptotic.csv").rfind("p,q,n,band_index,k_lo,k_hi,species\n", 0) == 0);
  CHECK(slurp(dir / "f.svg").find("<line") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("default output directory from the environment") {
  const fs::path dir = scratch("env");
  ::setenv(mqg::cli::output_dir_env, dir.c_str(), 1);
  auto r = run({"star", "--degree", "5"});
  ::unsetenv(mqg::cli::output_dir_env);
  REQUIRE(r.code == 0);
  const std::string text = slurp(dir / "star_n5.csv");
  CHECK(text.rfind("n_edges,index,energy\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  fs::remove_all(dir);
}

TEST_CASE("config file and precedence") {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "run.toml") << "degree = 7\nformat = \"csv\"\n";
  auto dumped = run({"star", "--config", (dir / "run.toml").string(), "--dump-config"});
  REQUIRE(dumped.code == 0);
  CHECK(dumped.out.find("degree=7") != std::string::npos);

  auto from_file = run({"star", "--config", (dir / "run.toml").string(), "--out", (dir / "a.csv").string()});
  REQUIRE(from_file.code == 0);
  CHECK(slurp(dir / "a.csv").find("7,3,") != std::string::npos);

  auto overridden = run({"star", "--config", (dir / "run.toml").string(), "--degree", "4", "--out",
                         (dir / "b.csv").string()});
  REQUIRE(overridden.code == 0);
  CHECK(slurp(dir / "b.csv") == "n_edges,index,energy\n4,1,-1.00000000000\n");
  fs::remove_all(dir);
}

TEST_CASE("prob for a single ratio") {
  const fs::path dir = scratch("prob");
  auto r = run({"prob", "--p", "1", "--q", "2", "--n", "20", "--out", (dir / "p.csv").string()});
  REQUIRE(r.code == 0);
  const std::string text = slurp(dir / "p.csv");
  CHECK(text.rfind("p,q,p_sigma,thouless_ref,n\n1,2,", 0) == 0);
  const double p_sigma = std::stod(text.substr(text.find("1,2,") + 4));
  CHECK(std::abs(p_sigma - 0.5) < 2e-3);
  fs::remove_all(dir);
}
