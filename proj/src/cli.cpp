#include "uavirs/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

namespace uavirs::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct Failure {
  int code = ok;
  json body;
};

Failure describe(const std::exception_ptr& e) {
  Failure f;
  try {
    std::rethrow_exception(e);
  } catch (const ScenarioError& ex) {
    f = {input_error, {{"status", "error"}, {"kind", "input"}, {"field", ex.field()}, {"message", ex.what()}}};
  } catch (const InfeasibleError& ex) {
    f = {infeasible, {{"status", "error"}, {"kind", "infeasible"}, {"message", ex.what()}}};
  } catch (const std::invalid_argument& ex) {
    f = {input_error, {{"status", "error"}, {"kind", "input"}, {"message", ex.what()}}};
  } catch (const std::exception& ex) {
    f = {solver_failure, {{"status", "error"}, {"kind", "solver"}, {"message", ex.what()}}};
  }
  return f;
}

int report(const Failure& f, const std::string& out_dir) {
  const std::string text = f.body.dump(2) + "\n";
  std::cout << text;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) {
      try {
        write_file(fs::path(out_dir) / "error.json", text);
      } catch (const std::exception&) {
      }
    }
  }
  return f.code;
}

Scenario load_with_model(const std::string& path, std::optional<int> model) {
  Scenario s = load_scenario_file(path);
  if (model) {
    if (*model != 1 && *model != 2) throw ScenarioError("--model", "must be 1 or 2");
    s.flying_model = static_cast<FlyingModel>(*model);
    s.finalize();
  }
  return s;
}

RunResult timed_run(Method m, const Scenario& s, const OptimizerOptions& opt, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_method(m, s, opt);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string axis_label(char axis) { return axis == 'T' ? "T" : "L"; }

}  // namespace

void write_run_outputs(const std::string& dir, const Scenario& s, const RunResult& r, double wall_time_s) {
  fs::create_directories(dir);
  const fs::path base(dir);
  const int N = r.kin.num_slots(), K = s.num_users();

  std::ostringstream traj;
  traj << "slot,x,y,vx,vy,ax,ay,flying_energy\n";
  const auto fly = flying_energy_per_slot(r.kin, s);
  for (int n = 0; n <= N; ++n) {
    const auto& p = r.kin.positions[n];
    const auto& v = r.kin.velocities[n];
    const Eigen::Vector2d a = n < N ? r.kin.accelerations[n] : Eigen::Vector2d::Zero();
    traj << n << ',' << num(p.x()) << ',' << num(p.y()) << ',' << num(v.x()) << ',' << num(v.y()) << ','
         << num(a.x()) << ',' << num(a.y()) << ',' << num(n < N ? fly[n] : 0.0) << '\n';
  }
  write_file(base / "trajectory.csv", traj.str());

  std::ostringstream power;
  power << "slot,user,power,secure_bits\n";
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      power << n << ',' << k + 1 << ',' << num(r.plan.powers[k][n]) << ',' << num(r.secure_bits[k][n]) << '\n';
  write_file(base / "power.csv", power.str());

  std::ostringstream phases;
  phases << "slot,element,theta\n";
  for (int n = 0; n < static_cast<int>(r.phases.phases.size()); ++n)
    for (int l = 0; l < static_cast<int>(r.phases.phases[n].size()); ++l)
      phases << n << ',' << l + 1 << ',' << num(r.phases.phases[n][l]) << '\n';
  write_file(base / "phases.csv", phases.str());

  json summary = {
      {"status", "ok"},
      {"method", to_string(r.method)},
      {"model", static_cast<int>(s.flying_model)},
      {"total_user_energy", r.user_energy},
      {"uav_energy", r.uav_energy},
      {"ratios", r.plan.ratios},
      {"secrecy_targets", r.plan.targets},
      {"achieved_secure_bits", r.plan.achieved},
      {"outer_iterations", r.outer_iterations},
      {"inner_iterations", r.inner_iterations},
      {"trace", r.trace},
      {"wall_time", wall_time_s},
  };
  write_file(base / "summary.json", summary.dump(2) + "\n");
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("--values: empty item");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument("--values: not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int run(const RunRequest& req) {
  try {
    const Scenario s = load_with_model(req.scenario_path, req.model);
    double seconds = 0.0;
    const RunResult r = timed_run(req.method, s, req.options, seconds);
    write_run_outputs(req.out_dir, s, r, seconds);
    return ok;
  } catch (...) {
    return report(describe(std::current_exception()), req.out_dir);
  }
}

int sweep(const SweepRequest& req) {
  Scenario base;
  try {
    if (req.values.empty()) throw std::invalid_argument("--values: at least one value is required");
    if (req.methods.empty()) throw std::invalid_argument("--methods: at least one method is required");
    if (req.axis != 'T' && req.axis != 'L') throw std::invalid_argument("--sweep: axis must be T or L");
    for (std::size_t i = 1; i < req.values.size(); ++i)
      if (!(req.values[i] > req.values[i - 1])) throw std::invalid_argument("--values: must be strictly ascending");
    if (req.axis == 'L')
      for (double v : req.values)
        if (v != std::floor(v) || v < 1) throw std::invalid_argument("--values: L must be positive integers");
    if (req.jobs < 1) throw std::invalid_argument("--jobs: must be >= 1");
    base = load_with_model(req.scenario_path, req.model);
  } catch (...) {
    return report(describe(std::current_exception()), req.out_dir);
  }

  struct Cell {
    double value = 0.0;
    Method method = Method::proposed;
    double energy = 0.0;
    std::string status = "ok";
  };
  std::vector<Cell> cells;
  for (double v : req.values)
    for (Method m : req.methods) cells.push_back({v, m});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& c = cells[i];
      const fs::path dir = fs::path(req.out_dir) / (axis_label(req.axis) + "_" + num(c.value)) / to_string(c.method);
      try {
        Scenario s = base;
        if (req.axis == 'T')
          s.mission_time = c.value;
        else
          s.num_elements = static_cast<int>(c.value);
        s.finalize();
        double seconds = 0.0;
        const RunResult r = timed_run(c.method, s, req.options, seconds);
        write_run_outputs(dir.string(), s, r, seconds);
        c.energy = r.user_energy;
      } catch (...) {
        const Failure f = describe(std::current_exception());
        c.status = f.body.value("kind", "solver");
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) write_file(dir / "error.json", f.body.dump(2) + "\n");
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(req.jobs, static_cast<int>(cells.size()));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "axis,value,method,total_user_energy,status\n";
  for (const auto& c : cells) {
    csv << axis_label(req.axis) << ',' << num(c.value) << ',' << to_string(c.method) << ','
        << (c.status == "ok" ? num(c.energy) : std::string()) << ',' << c.status << '\n';
  }
  fs::create_directories(req.out_dir);
  write_file(fs::path(req.out_dir) / "sweep.csv", csv.str());
  return ok;  // per-cell failures are data, not a sweep failure
}

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient secure offloading planner for a UAV-mounted IRS"};
  app.require_subcommand(1);

  std::string scenario, out = ".", method = "proposed", axis, values, methods = "proposed";
  int model = 0, max_outer = -1, max_inner = -1, jobs = 1;
  double tol = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario, "scenario file")->required();
    cmd->add_option("--model", model, "flying model override (1 kinetic, 2 aerodynamic)");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--tol", tol, "outer convergence tolerance, J");
    cmd->add_option("--max-outer", max_outer, "outer iteration cap");
    cmd->add_option("--max-inner", max_inner, "inner SCA iteration cap");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "optimize one scenario");
  add_common(run_cmd);
  run_cmd->add_option("--method", method, "proposed | local_only | identity_phase | fixed_phase | no_traj_opt_phase");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep mission time or element count");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--sweep", axis, "axis: T or L")->required();
  sweep_cmd->add_option("--values", values, "comma-separated axis values, ascending")->required();
  sweep_cmd->add_option("--methods", methods, "comma-separated methods");
  sweep_cmd->add_option("--jobs", jobs, "concurrent cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return input_error;
  }

  OptimizerOptions opt;
  std::optional<int> model_override;
  try {
    if (model != 0) model_override = model;
    if (tol >= 0) opt.outer_tol = tol;
    if (max_outer >= 0) opt.max_outer = max_outer;
    if (max_inner >= 0) opt.max_inner = max_inner;
    if (model != 0 && model != 1 && model != 2) throw std::invalid_argument("--model: must be 1 or 2");
  } catch (...) {
    return report(describe(std::current_exception()), out);
  }

  if (*run_cmd) {
    const auto m = parse_method(method);
    if (!m) return report(describe(std::make_exception_ptr(std::invalid_argument("--method: unknown '" + method + "'"))), out);
    return run({scenario, *m, model_override, out, opt});
  }

  SweepRequest req;
  req.scenario_path = scenario;
  req.model = model_override;
  req.out_dir = out;
  req.options = opt;
  req.jobs = jobs;
  try {
    if (axis != "T" && axis != "L") throw std::invalid_argument("--sweep: axis must be T or L");
    req.axis = axis[0];
    req.values = values.empty() ? std::vector<double>{} : parse_value_list(values);
    req.methods.clear();
    std::stringstream ss(methods);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto m = parse_method(item);
      if (!m) throw std::invalid_argument("--methods: unknown '" + item + "'");
      req.methods.push_back(*m);
    }
  } catch (...) {
    return report(describe(std::current_exception()), out);
  }
  return sweep(req);
}

}  // namespace uavirs::cli
