#include "uavirs/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uavirs {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ccw_gap(double from, double to) { return wrap_phase(to - from); }

struct SectorLayout {
  std::vector<int> order;        // users sorted by polar angle around the AP
  std::vector<double> boundary;  // boundary[i] is the ray between order[i] and order[i+1]
};

SectorLayout sector_layout(const Scenario& s) {
  const int K = s.num_users();
  const Eigen::Vector2d ap = s.ap_xy();
  SectorLayout lay;
  lay.order.resize(K);
  std::vector<double> angle(K);
  for (int k = 0; k < K; ++k) {
    const Eigen::Vector2d d = s.user_xy(k) - ap;
    angle[k] = wrap_phase(std::atan2(d.y(), d.x()));
    lay.order[k] = k;
  }
  std::stable_sort(lay.order.begin(), lay.order.end(), [&](int a, int b) { return angle[a] < angle[b]; });
  lay.boundary.resize(K);
  for (int i = 0; i < K; ++i) {
    const int a = lay.order[i], b = lay.order[(i + 1) % K];
    const Eigen::Vector2d mid = 0.5 * (s.user_xy(a) + s.user_xy(b)) - ap;
    const double gap = K == 1 ? kTwoPi : ccw_gap(angle[a], angle[b]);
    // A midpoint on the AP itself has no direction; fall back to the angular bisector.
    if (mid.norm() > 1e-9 * (1.0 + (s.user_xy(a) - ap).norm()) && gap < std::numbers::pi)
      lay.boundary[i] = wrap_phase(std::atan2(mid.y(), mid.x()));
    else
      lay.boundary[i] = wrap_phase(angle[a] + 0.5 * gap);
  }
  return lay;
}

PhaseSchedule maybe_quantized(PhaseSchedule ps, const Scenario& s) {
  if (!s.phase_levels) return ps;
  for (auto& row : ps.phases) row = quantize_phases(row, *s.phase_levels);
  ps.levels = s.phase_levels;
  return ps;
}

PowerOffloadPlan initial_plan(const Scenario& s) {
  PowerOffloadPlan p = PowerOffloadPlan::local_only(s);
  for (auto& row : p.powers) std::fill(row.begin(), row.end(), s.p_avg);
  return p;
}

void finish(RunResult& r, const Scenario& s, const LinkGains& g) {
  r.secure_bits = secure_bits_per_slot(s, g, r.plan.powers);
  r.plan.achieved = secure_throughput(s, g, r.plan.powers);
  r.user_energy = total_objective(r.plan, s);
  r.uav_energy = total_flying_energy(r.kin, s);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::local_only: return "local_only";
    case Method::identity_phase: return "identity_phase";
    case Method::fixed_phase: return "fixed_phase";
    case Method::no_traj_opt_phase: return "no_traj_opt_phase";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::proposed, Method::local_only, Method::identity_phase, Method::fixed_phase,
                   Method::no_traj_opt_phase})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

double step_schedule_default(int z) { return StepSchedule{}(z); }

PhaseSchedule design_phases(const Scenario& s, const Kinematics& kin, const PowerOffloadPlan& plan) {
  const int K = s.num_users(), N = kin.num_slots();
  const LinkGains g = trajectory_gains(s, kin);
  const auto bits = secure_bits_per_slot(s, g, plan.powers);
  std::vector<double> deficit(K, 0.0);
  for (int k = 0; k < K; ++k) deficit[k] = k < static_cast<int>(plan.targets.size()) ? plan.targets[k] : 0.0;

  PhaseSchedule ps;
  ps.phases.resize(N);
  ps.owner.assign(N, -1);
  for (int n = 0; n < N; ++n) {
    int owner = -1;
    double best = 0.0;
    for (int k = 0; k < K; ++k) {
      if (!(plan.powers[k][n] > 0)) continue;
      if (owner < 0 || deficit[k] > best) {
        owner = k;
        best = deficit[k];
      }
    }
    ps.owner[n] = owner;
    if (owner < 0) {
      ps.phases[n].assign(s.num_elements, 0.0);
      continue;
    }
    deficit[owner] -= bits[owner][n];
    ps.phases[n] = optimal_phases(kin.positions[n], s.users[owner].position, s.ap_position, s.num_elements,
                                  s.spacing_ratio, s.altitude);
  }
  return maybe_quantized(std::move(ps), s);
}

PhaseSchedule identity_phases(const Scenario& s) {
  PhaseSchedule ps;
  ps.phases.assign(s.num_slots, std::vector<double>(s.num_elements, 0.0));
  ps.owner.assign(s.num_slots, -1);
  return ps;
}

int sector_of(const Scenario& s, const Eigen::Vector2d& xy) {
  const int K = s.num_users();
  if (K <= 1) return 0;
  const SectorLayout lay = sector_layout(s);
  const Eigen::Vector2d d = xy - s.ap_xy();
  const double a = wrap_phase(std::atan2(d.y(), d.x()));
  // Sector of order[i] spans boundary[i−1] → boundary[i] counter-clockwise.
  for (int i = 0; i < K; ++i) {
    const double lo = lay.boundary[(i + K - 1) % K], hi = lay.boundary[i];
    if (ccw_gap(lo, a) < ccw_gap(lo, hi)) return lay.order[i];
  }
  return lay.order[0];
}

PhaseSchedule fixed_sector_phases(const Scenario& s, const Kinematics& kin) {
  const int K = s.num_users(), N = kin.num_slots();
  const SectorLayout lay = sector_layout(s);
  // Closed-form phases of the sector's user with the UAV on the sector
  // bisector, halfway out to the user's distance from the AP.
  std::vector<std::vector<double>> sector_phase(K);
  for (int i = 0; i < K; ++i) {
    const int k = lay.order[i];
    const double lo = K == 1 ? 0.0 : lay.boundary[(i + K - 1) % K];
    const double span = K == 1 ? kTwoPi : ccw_gap(lo, lay.boundary[i]);
    const double mid_angle = lo + 0.5 * span;
    const double radius = 0.5 * (s.user_xy(k) - s.ap_xy()).norm();
    const Eigen::Vector2d at = s.ap_xy() + radius * Eigen::Vector2d(std::cos(mid_angle), std::sin(mid_angle));
    sector_phase[k] =
        optimal_phases(at, s.users[k].position, s.ap_position, s.num_elements, s.spacing_ratio, s.altitude);
  }
  PhaseSchedule ps;
  ps.phases.resize(N);
  ps.owner.resize(N);
  for (int n = 0; n < N; ++n) {
    const int k = sector_of(s, kin.positions[n]);
    ps.owner[n] = k;
    ps.phases[n] = sector_phase[k];
  }
  return maybe_quantized(std::move(ps), s);
}

RunResult algorithm3(const Scenario& s, const OptimizerOptions& opt) {
  RunResult r;
  r.method = Method::proposed;
  r.kin = reference_path(s);
  LinkGains g = trajectory_gains(s, r.kin);
  auto a2 = algorithm2(s, g, initial_plan(s), opt);
  r.plan = std::move(a2.plan);
  r.inner_iterations += a2.iterations;
  double energy = total_objective(r.plan, s);
  r.trace.push_back(energy);

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    auto a1 = algorithm1(s, r.kin, r.plan, opt);
    r.inner_iterations += a1.iterations;
    if (!a1.moved) break;
    const LinkGains g_next = trajectory_gains(s, a1.kin);
    auto next = algorithm2(s, g_next, r.plan, opt);
    r.inner_iterations += next.iterations;
    const double e_next = total_objective(next.plan, s);
    r.outer_iterations = outer + 1;
    // The previous plan stays feasible on the new path, so a rise is numerical noise.
    if (e_next > energy + 1e-9 * (1.0 + energy)) break;
    r.kin = std::move(a1.kin);
    r.plan = std::move(next.plan);
    g = g_next;
    const double change = energy - e_next;
    energy = e_next;
    r.trace.push_back(energy);
    if (change < opt.outer_tol) break;
  }
  r.phases = design_phases(s, r.kin, r.plan);
  finish(r, s, g);
  return r;
}

RunResult run_baseline(Method kind, const Scenario& s, const OptimizerOptions& opt) {
  RunResult r;
  r.method = kind;
  if (kind == Method::proposed) return algorithm3(s, opt);
  if (kind == Method::local_only) {
    // The UAV path plays no role; any admissible reference will do.
    try {
      r.kin = reference_path(s);
    } catch (const InfeasibleError&) {
      std::vector<Eigen::Vector2d> pos(s.num_slots + 1);
      for (int n = 0; n <= s.num_slots; ++n)
        pos[n] = s.initial_xy + (s.terminal_xy - s.initial_xy) * (static_cast<double>(n) / s.num_slots);
      r.kin = kinematics_from_positions(std::move(pos), s.slot_length);
    }
    r.plan = PowerOffloadPlan::local_only(s);
    r.phases = identity_phases(s);
    finish(r, s, trajectory_gains(s, r.kin));
    r.trace.push_back(r.user_energy);
    return r;
  }

  r.kin = reference_path(s);
  LinkGains g;
  if (kind == Method::no_traj_opt_phase) {
    g = trajectory_gains(s, r.kin);
  } else {
    r.phases = kind == Method::identity_phase ? identity_phases(s) : fixed_sector_phases(s, r.kin);
    g = phase_schedule_gains(s, r.kin, r.phases);
  }
  auto a2 = algorithm2(s, g, initial_plan(s), opt);
  r.plan = std::move(a2.plan);
  r.inner_iterations = a2.iterations;
  if (kind == Method::no_traj_opt_phase) r.phases = design_phases(s, r.kin, r.plan);
  finish(r, s, g);
  r.trace.push_back(r.user_energy);
  return r;
}

RunResult run_method(Method m, const Scenario& s, const OptimizerOptions& opt) {
  return m == Method::proposed ? algorithm3(s, opt) : run_baseline(m, s, opt);
}

}  // namespace uavirs
