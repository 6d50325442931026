#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uavirs/optimizer.hpp"

namespace uavirs::cli {

enum ExitCode { ok = 0, infeasible = 1, input_error = 2, solver_failure = 3 };

struct RunRequest {
  std::string scenario_path;
  Method method = Method::proposed;
  std::optional<int> model;  // overrides the scenario's flying model
  std::string out_dir;
  OptimizerOptions options;
};

struct SweepRequest {
  std::string scenario_path;
  char axis = 'T';  // 'T' mission time, 'L' reflecting elements
  std::vector<double> values;
  std::vector<Method> methods{Method::proposed};
  std::optional<int> model;
  std::string out_dir;
  OptimizerOptions options;
  int jobs = 1;
};

/// Writes trajectory.csv, power.csv, phases.csv and summary.json into `dir`.
void write_run_outputs(const std::string& dir, const Scenario& s, const RunResult& r, double wall_time_s);

/// Runs one scenario; on failure writes error.json and prints it to stdout.
int run(const RunRequest& req);

/// Runs every (value, method) cell into out_dir/<axis>_<value>/<method>/ and
/// writes out_dir/sweep.csv. Failed cells are recorded and skipped.
int sweep(const SweepRequest& req);

/// Parses "1,2,3"; throws std::invalid_argument on malformed items.
std::vector<double> parse_value_list(const std::string& text);

/// Entry point of the `uavirs` executable.
int main(int argc, char** argv);

}  // namespace uavirs::cli
