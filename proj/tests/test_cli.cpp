// Drives the installed binary end to end through a shell: exit codes, file
// formats, and rerun determinism.
#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ionqec/common.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = IONQEC_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "ionqec_cli_out.txt";
  const std::string cmd = kCli + " " + args + " > " + tmp.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream f(tmp);
  std::ostringstream os;
  os << f.rdbuf();
  return {WEXITSTATUS(rc), os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path workdir() {
  const fs::path d = fs::temp_directory_path() / "ionqec_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("help and usage errors") {
  REQUIRE(run("--help").exit_code == 0);
  REQUIRE(run("definitely-not-a-command").exit_code == 2);
  REQUIRE(run("simulate --no-such-flag 3").exit_code == 2);
}

TEST_CASE("modes emits the spectrum as JSON") {
  const auto res = run("modes");
  REQUIRE(res.exit_code == 0);
  const auto j = json::parse(res.out);
  REQUIRE(j.at("frequencies").size() == 6);
  REQUIRE(j.at("degenerate_groups") ==
          json({{0}, {1, 2}, {3, 4}, {5}}));
  REQUIRE(j.at("frequencies")[0].get<double>() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("verify accepts both published solutions and writes manifests on search") {
  const auto dir = workdir();
  const fs::path spokes = dir / "spokes.json";
  {
    json j;
    j["target"] = "spokes";
    j["P"] = {3.125, 2.604, 2.604, 0.0};
    j["R"] = -1.400;
    std::ofstream(spokes) << j.dump(2);
  }
  auto res = run("verify --solution " + spokes.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.out.find("max_deviation") != std::string::npos);

  const fs::path ring = dir / "ring.json";
  {
    json j;
    j["target"] = "ring";
    j["P"] = {10.99, 7.677, 19.65, 10.99};
    j["R"] = -0.6737;
    std::ofstream(ring) << j.dump(2);
  }
  REQUIRE(run("verify --solution " + ring.string()).exit_code == 0);

  // a deliberately broken solution fails with exit 1
  const fs::path bad = dir / "bad.json";
  {
    json j;
    j["target"] = "spokes";
    j["P"] = {5.0, 2.604, 2.604, 0.0};
    j["R"] = -1.400;
    std::ofstream(bad) << j.dump(2);
  }
  REQUIRE(run("verify --solution " + bad.string()).exit_code == 1);
}

TEST_CASE("phases emits the 16-row class table") {
  const auto res = run("phases --areas 3.125 2.604 2.604 0 --ratio -1.4");
  REQUIRE(res.exit_code == 0);
  std::istringstream is(res.out);
  std::string line;
  std::getline(is, line);
  REQUIRE(line == "representative,multiplicity,phase_over_pi,phase_over_pi_mod2");
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 16);
  REQUIRE(res.out.find("|1>|11111>") != std::string::npos);
}

TEST_CASE("simulate returns unit fidelity in the trivial configuration") {
  const auto res = run("simulate --code 5rc --sigma 0 --samples 1 --t 0 --seed 1");
  REQUIRE(res.exit_code == 0);
  std::istringstream is(res.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  const auto first_comma = row.find(',');
  const auto second_comma = row.find(',', first_comma + 1);
  const double mean = std::stod(row.substr(first_comma + 1, second_comma));
  REQUIRE(mean == Catch::Approx(1.0).margin(1e-3));   // ~1 up to the 5e-4 gate windows
}

TEST_CASE("inject prints per-error fidelities") {
  const auto res = run("inject --code 5rc --error Z@3 --error Z@1");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.out.find("Z@3 fidelity=1.000000") != std::string::npos);
  REQUIRE(res.out.find("combined [ Z@3 Z@1 ] fidelity=1.000000") != std::string::npos);
}

TEST_CASE("search writes a solution file that verify accepts") {
  const auto dir = workdir();
  const fs::path out = dir / "found.json";
  const auto res =
      run("search --target spokes --bound 1 --seed 1 --threads 2 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(out));
  REQUIRE(fs::exists(dir / "found.json.manifest.json"));
  const auto j = json::parse(slurp(out));
  REQUIRE(j.at("P").size() == 4);
  REQUIRE(j.at("n").size() == 16);
  REQUIRE(j.at("residual").get<double>() < 1e-6);
  REQUIRE(run("verify --solution " + out.string() + " --tol 1e-4").exit_code == 0);

  const auto man = json::parse(slurp(dir / "found.json.manifest.json"));
  REQUIRE(man.at("subcommand") == "search");
  REQUIRE(man.at("parameters").at("target") == "spokes");
}

TEST_CASE("search accepts a custom 64-phase target file") {
  const auto dir = workdir();
  const fs::path tgt = dir / "custom_target.json";
  {
    // the spokes phases written out as an explicit 64-entry target
    json j;
    j["name"] = "custom";
    std::vector<double> phases(64, 0.0);
    for (int s = 0; s < 64; ++s) {
      const int hub = (s >> 5) & 1;
      const int w = __builtin_popcount(s & 31);
      phases[s] = ((hub * w) % 2) ? ionqec::kPi : 0.0;
    }
    j["phases"] = phases;
    std::ofstream(tgt) << j.dump();
  }
  const fs::path out = dir / "custom_found.json";
  const auto res = run("search --target-file " + tgt.string() +
                       " --bound 1 --seed 1 --threads 2 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  const auto j = json::parse(slurp(out));
  REQUIRE(j.at("residual").get<double>() < 1e-6);
}

TEST_CASE("sweep reruns are byte-identical for different thread counts") {
  const auto dir = workdir();
  const std::string base = " sweep --code 5rc --sigmas 0 0.01 0.02 --samples 16 "
                           "--tmax 0.45 --seed 3 --out ";
  const auto res1 = run(base + (dir / "a").string() + " --threads 1");
  REQUIRE(res1.exit_code == 0);
  const auto res2 = run(base + (dir / "b").string() + " --threads 2");
  REQUIRE(res2.exit_code == 0);
  REQUIRE(slurp(dir / "a_curves.csv") == slurp(dir / "b_curves.csv"));
  REQUIRE(slurp(dir / "a_sweep.csv") == slurp(dir / "b_sweep.csv"));
  REQUIRE(slurp(dir / "a_fit.json") == slurp(dir / "b_fit.json"));
  REQUIRE(!slurp(dir / "a_curves.csv").empty());
}
