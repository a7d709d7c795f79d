#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lattice_dirac/cli.hpp"
#include "lattice_dirac/errors.hpp"

using namespace lattice_dirac;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "lattice-dirac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lattice_dirac_cli_" + name);
}

}  // namespace

TEST_CASE("complex literals") {
  using C = std::complex<double>;
  CHECK(parse_complex("2i") == C(0, 2));
  CHECK(parse_complex("0.4+1.2i") == C(0.4, 1.2));
  CHECK(parse_complex("-i") == C(0, -1));
  CHECK(parse_complex("i") == C(0, 1));
  CHECK(parse_complex("3") == C(3, 0));
  CHECK(parse_complex("1e-1-2.5e1i") == C(0.1, -25));
  CHECK(parse_complex(" 1-i ") == C(1, -1));
  for (const char* bad : {"", "abc", "1+", "2ii", "1+2", "i2", "1..2i"}) CHECK_THROWS_AS(parse_complex(bad), ConfigError);
}

TEST_CASE("spectrum prints the band union") {
  const Outcome r = invoke({"spectrum", "--m", "0", "--h", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "[-3.41421356, 0] \xe2\x88\xaa [0, 3.41421356]\n");
  CHECK(invoke({"spectrum", "--m", "1", "--h", "0.5"}).out.find("[1, ") != std::string::npos);
}

TEST_CASE("omega scan rows") {
  const Outcome r = invoke({"omega-scan", "--grid", "6"});
  CHECK(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(!ls.empty());
  CHECK(ls.front() == "kind,xi1,xi2,omega");
  int rows = 0;
  for (const auto& l : ls)
    if (std::count(l.begin(), l.end(), ',') == 3 && l.find(' ') == std::string::npos && l != ls.front()) ++rows;
  CHECK(rows == 6 * 6 + 6);
  CHECK(ls.back().find("PASS") != std::string::npos);
}

TEST_CASE("argument errors exit with 1") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"no-such-experiment"}).code == 1);
  CHECK(invoke({"spectrum", "--bogus"}).code == 1);
  CHECK(invoke({"spectrum", "--h", "abc"}).code == 1);
  CHECK(invoke({"spectrum", "--h", "-1"}).code == 1);
  CHECK(invoke({"oracle-eigs", "--n", "7"}).code == 1);
  CHECK(invoke({"resolve-free", "--sweep", "0.4,0.3"}).code == 1);
  CHECK(invoke({"resolve-free", "--z", "2x"}).code == 1);
  CHECK(invoke({"resolve-free", "--norm-probes", "-1"}).code == 1);
  CHECK(invoke({"spectrum", "--norm-probes", "2"}).code == 1);
  const Outcome r = invoke({"resolve-potential", "--z", "0.5i", "--no-probe"});
  CHECK(r.code == 1);
  CHECK(r.err.find("resolve-potential") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const Outcome r = invoke({"spectrum", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--h") != std::string::npos);
}

TEST_CASE("sweep CSV is deterministic with --reproducible") {
  const std::vector<std::string> args{"resolve-free", "--sweep", "0.4,0.2,0.1", "--refine", "2", "--no-probe", "--reproducible"};
  const Outcome a = invoke(args), b = invoke(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto ls = lines(a.out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[0] == "experiment,h,N,error,slope-so-far,wall-ms");
  // slope needs three points
  CHECK(ls[1].find(",,0") != std::string::npos);
  CHECK(ls[2].find(",,0") != std::string::npos);
  CHECK(ls[3].find(",,") == std::string::npos);
  CHECK(ls[4].find("PASS") != std::string::npos);
}

TEST_CASE("JSON output and output files") {
  const auto path = temp_path("sweep.json");
  std::filesystem::remove(path);
  const Outcome r = invoke({"project", "--dim", "1", "--format", "json", "--output", path.string(), "--reproducible"});
  CHECK(r.code == 0);
  REQUIRE(std::filesystem::exists(path));
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("schema_version") == "1");
  CHECK(j.at("experiment") == "project");
  CHECK(j.at("passed") == true);
  CHECK(j.at("series").size() >= 2);
  std::filesystem::remove(path);

  const auto table = temp_path("spectrum.json");
  CHECK(invoke({"spectrum", "--m", "0", "--format", "json", "--output", table.string()}).code == 0);
  std::ifstream tin(table);
  CHECK(nlohmann::json::parse(tin).at("schema_version") == "1");
  std::filesystem::remove(table);
}

TEST_CASE("config files, flags take precedence") {
  const auto path = temp_path("config.toml");
  {
    std::ofstream f(path);
    f << "[spectrum]\nm = 0\nh = 1\n";
  }
  CHECK(invoke({"--config", path.string(), "spectrum"}).out == "[-3.41421356, 0] \xe2\x88\xaa [0, 3.41421356]\n");
  CHECK(invoke({"--config", path.string(), "spectrum", "--m", "1"}).out.find("[1, ") != std::string::npos);
  {
    std::ofstream f(path);
    f << "bogus = 3\n";
  }
  CHECK(invoke({"--config", path.string(), "spectrum"}).code == 1);
  std::filesystem::remove(path);
}

TEST_CASE("oracle subcommand") {
  const Outcome free = invoke({"oracle-eigs", "--n", "8", "--h", "0.5"});
  CHECK(free.code == 0);
  CHECK(free.out.find("PASS") != std::string::npos);
  const Outcome pot = invoke({"oracle-eigs", "--n", "8", "--h", "0.5", "--potential", "non-hermitian"});
  CHECK(pot.code == 0);
  CHECK(pot.out.find("PASS") != std::string::npos);
}

TEST_CASE("a failed convergence check exits with 2") {
  // in a 3.2 box the truncation of the spectral reference dominates and the error plateaus
  const Outcome r = invoke({"ift", "--box", "3.2", "--no-probe", "--reproducible"});
  CHECK(r.code == 2);
  CHECK(r.out.find("FAIL") != std::string::npos);
}
