#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "doctest.h"
#include "uavirs/cli.hpp"

using namespace uavirs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uavirs_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scenario(const fs::path& dir, const Scenario& s) {
  const fs::path p = dir / "scenario.ini";
  std::ofstream(p) << emit_scenario(s);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("local-only run writes zero powers and full local ratios") {
  const fs::path dir = scratch_dir("local");
  cli::RunRequest req;
  req.scenario_path = write_scenario(dir, reference_square_scenario(10.0)).string();
  req.method = Method::local_only;
  req.out_dir = (dir / "out").string();
  REQUIRE(cli::run(req) == cli::ok);

  const auto power = read_csv(dir / "out" / "power.csv");
  REQUIRE(power.size() == 1 + 10 * 4);
  CHECK(power[0] == std::vector<std::string>{"slot", "user", "power", "secure_bits"});
  for (std::size_t i = 1; i < power.size(); ++i) CHECK(std::stod(power[i][2]) == 0.0);

  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  for (double rho : summary["ratios"]) CHECK(rho == 1.0);
  CHECK(summary["total_user_energy"].get<double>() ==
        doctest::Approx(4 * 1e-26 * std::pow(1550.7 * 5e6, 3) / 100.0).epsilon(1e-12));
  CHECK(read_csv(dir / "out" / "trajectory.csv").size() == 1 + 11);
  CHECK(read_csv(dir / "out" / "phases.csv").size() == 1 + 10 * 16);
}

TEST_CASE("malformed scenario exits with an input error naming the key") {
  const fs::path dir = scratch_dir("malformed");
  std::string text = emit_scenario(reference_square_scenario(10.0));
  const auto at = text.find("duration_s = ");
  REQUIRE(at != std::string::npos);
  text.replace(at, text.find('\n', at) - at, "duration_s = ten");
  std::ofstream(dir / "bad.ini") << text;

  cli::RunRequest req;
  req.scenario_path = (dir / "bad.ini").string();
  req.out_dir = (dir / "out").string();
  CHECK(cli::run(req) == cli::input_error);
  const json err = json::parse(slurp(dir / "out" / "error.json"));
  CHECK(err["field"] == "mission.duration_s");

  req.scenario_path = (dir / "missing.ini").string();
  CHECK(cli::run(req) == cli::input_error);
}

TEST_CASE("sweep validates its value list") {
  const fs::path dir = scratch_dir("values");
  cli::SweepRequest req;
  req.scenario_path = write_scenario(dir, reference_square_scenario(10.0)).string();
  req.out_dir = (dir / "out").string();
  CHECK(cli::sweep(req) == cli::input_error);
  req.values = {16, 8};
  req.axis = 'L';
  CHECK(cli::sweep(req) == cli::input_error);
  req.values = {8, 12.5};
  CHECK(cli::sweep(req) == cli::input_error);
  CHECK_THROWS_AS(cli::parse_value_list("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_value_list("1,x"), std::invalid_argument);
  CHECK(cli::parse_value_list(" 100, 140 ,180") == std::vector<double>{100, 140, 180});
}

TEST_CASE("command line flags") {
  const fs::path dir = scratch_dir("flags");
  const std::string scenario = write_scenario(dir, reference_square_scenario(10.0)).string();
  const std::string out = (dir / "out").string();
  auto call = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(call({"uavirs", "run", "--scenario", scenario, "--method", "bogus", "--out", out}) == cli::input_error);
  CHECK(call({"uavirs", "run", "--scenario", scenario, "--model", "3", "--out", out}) == cli::input_error);
  CHECK(call({"uavirs", "sweep", "--scenario", scenario, "--sweep", "L", "--values", "", "--out", out}) ==
        cli::input_error);
  CHECK(call({"uavirs", "run", "--scenario", scenario, "--method", "local_only", "--out", out}) == cli::ok);
  CHECK(fs::exists(dir / "out" / "summary.json"));
}

TEST_CASE("reruns are identical apart from the wall time") {
  const fs::path dir = scratch_dir("determinism");
  cli::RunRequest req;
  req.scenario_path = write_scenario(dir, reference_square_scenario(10.0)).string();
  req.out_dir = (dir / "a").string();
  REQUIRE(cli::run(req) == cli::ok);
  req.out_dir = (dir / "b").string();
  REQUIRE(cli::run(req) == cli::ok);
  for (const char* f : {"trajectory.csv", "power.csv", "phases.csv"}) {
    CAPTURE(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  json a = json::parse(slurp(dir / "a" / "summary.json")), b = json::parse(slurp(dir / "b" / "summary.json"));
  a.erase("wall_time");
  b.erase("wall_time");
  CHECK(a == b);
}

TEST_CASE("element sweep runs cells concurrently") {
  const fs::path dir = scratch_dir("sweep");
  cli::SweepRequest req;
  req.scenario_path = write_scenario(dir, reference_square_scenario(10.0)).string();
  req.out_dir = (dir / "out").string();
  req.axis = 'L';
  req.values = {8, 16};
  req.methods = {Method::local_only, Method::no_traj_opt_phase};
  req.jobs = 2;
  REQUIRE(cli::sweep(req) == cli::ok);
  const auto rows = read_csv(dir / "out" / "sweep.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"axis", "value", "method", "total_user_energy", "status"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == "L");
    CHECK(rows[i][4] == "ok");
    CHECK(fs::exists(dir / "out" / ("L_" + rows[i][1]) / rows[i][2] / "summary.json"));
  }
  // More elements never hurt the optimal-phase baseline.
  CHECK(std::stod(rows[4][3]) <= std::stod(rows[2][3]));
}

TEST_CASE("failing sweep cells are recorded") {
  const fs::path dir = scratch_dir("sweep_fail");
  Scenario s = reference_square_scenario(20.0);
  s.terminal_xy = {90.0, 0.0};
  s.energy_budget = 5000.0;  // enough for a slow crossing only
  s.finalize();
  cli::SweepRequest req;
  req.scenario_path = write_scenario(dir, s).string();
  req.out_dir = (dir / "out").string();
  req.axis = 'T';
  req.values = {20, 40};
  req.methods = {Method::identity_phase};
  REQUIRE(cli::sweep(req) == cli::ok);
  const auto rows = read_csv(dir / "out" / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][4] == "infeasible");
  CHECK(rows[1][3].empty());
  CHECK(rows[2][4] == "ok");
  CHECK(fs::exists(dir / "out" / "T_20" / "identity_phase" / "error.json"));
}

TEST_CASE("shipped layout: proposed plan within the energy budget") {
  const fs::path dir = scratch_dir("uneven");
  cli::RunRequest req;
  req.scenario_path = UAVIRS_SOURCE_DIR "/scenarios/square_uneven.ini";
  req.out_dir = (dir / "out").string();
  // Capped to keep the unit suite short; the acceptance run is uncapped.
  req.options.max_outer = 1;
  req.options.max_inner = 5;
  REQUIRE(cli::run(req) == cli::ok);
  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["total_user_energy"].get<double>() > 0.0);
  CHECK(summary["uav_energy"].get<double>() <= 20000.0);
  CHECK(summary["method"] == "proposed");
}
