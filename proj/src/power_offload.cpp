#include <algorithm>
#include <cmath>
#include <numbers>

#include "uavirs/channel.hpp"
#include "uavirs/optimizer.hpp"

namespace uavirs {
namespace {

constexpr double kLn2 = std::numbers::ln2;

double bits_per_rate_unit(const Scenario& s) { return s.bandwidth_hz * s.slot_length; }

// A user takes part in the secure offloading only with a nonzero task and
// with at least one usable slot against every eavesdropper.
std::vector<std::vector<std::vector<int>>> usable_slots(const Scenario& s, const LinkGains& g) {
  const int K = s.num_users(), N = s.num_slots;
  std::vector<std::vector<std::vector<int>>> slots(K, std::vector<std::vector<int>>(K));
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      if (j == k && K > 1) continue;
      for (int n = 0; n < N; ++n) {
        const double e = K > 1 ? g.eve[k][j][n] : 0.0;
        if (g.legit[k][n] > e) slots[k][j].push_back(n);
      }
    }
  }
  return slots;
}

bool user_can_offload(const Scenario& s, int k, const std::vector<std::vector<std::vector<int>>>& slots) {
  if (!(s.users[k].input_bits > 0)) return false;
  const int K = s.num_users();
  for (int j = 0; j < K; ++j) {
    if (j == k && K > 1) continue;
    if (slots[k][j].empty()) return false;
  }
  return true;
}

}  // namespace

LinkGains trajectory_gains(const Scenario& s, const Kinematics& kin) {
  const int K = s.num_users(), N = s.num_slots;
  const auto params = LinkParams::from(s);
  const double num = params.coherent_gain() / params.noise_power;
  LinkGains g;
  g.legit.assign(K, std::vector<double>(N, 0.0));
  g.eve.assign(K, std::vector<std::vector<double>>(K, std::vector<double>(N, 0.0)));
  for (int n = 0; n < N; ++n) {
    const Eigen::Vector2d& p = kin.positions[n];
    const double d_ua = squared_distance(p, s.ap_position, s.altitude);
    std::vector<double> d(K);
    for (int k = 0; k < K; ++k) d[k] = squared_distance(p, s.users[k].position, s.altitude);
    for (int k = 0; k < K; ++k) {
      g.legit[k][n] = num / (d_ua * d[k]);
      for (int j = 0; j < K; ++j)
        if (j != k) g.eve[k][j][n] = num / (d[j] * d[k]);
    }
  }
  return g;
}

LinkGains phase_schedule_gains(const Scenario& s, const Kinematics& kin, const PhaseSchedule& phases) {
  LinkGains g = trajectory_gains(s, kin);
  const auto params = LinkParams::from(s);
  for (int n = 0; n < s.num_slots; ++n)
    for (int k = 0; k < s.num_users(); ++k) {
      const auto h = effective_channel(kin.positions[n], phases.phases[n], s.users[k].position, s.ap_position, params);
      g.legit[k][n] = std::norm(h) / params.noise_power;
    }
  return g;
}

std::vector<std::vector<double>> secure_bits_per_slot(const Scenario& s, const LinkGains& g,
                                                      const std::vector<std::vector<double>>& powers) {
  const int K = s.num_users(), N = s.num_slots;
  std::vector<std::vector<double>> bits(K, std::vector<double>(N, 0.0));
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) {
      const double pw = powers[k][n];
      const double r_ka = std::log2(1.0 + pw * g.legit[k][n]);
      double worst = r_ka;
      for (int j = 0; j < K; ++j)
        if (j != k) worst = std::min(worst, std::max(0.0, r_ka - std::log2(1.0 + pw * g.eve[k][j][n])));
      bits[k][n] = bits_per_rate_unit(s) * worst;
    }
  return bits;
}

std::vector<double> secure_throughput(const Scenario& s, const LinkGains& g,
                                      const std::vector<std::vector<double>>& powers) {
  const int K = s.num_users(), N = s.num_slots;
  std::vector<double> out(K, 0.0);
  for (int k = 0; k < K; ++k) {
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < K; ++j) {
      if (j == k && K > 1) continue;
      double sum = 0.0;
      for (int n = 0; n < N; ++n) {
        const double pw = powers[k][n];
        const double e = j == k ? 0.0 : std::log2(1.0 + pw * g.eve[k][j][n]);
        sum += std::max(0.0, std::log2(1.0 + pw * g.legit[k][n]) - e);
      }
      worst = std::min(worst, sum);
    }
    out[k] = bits_per_rate_unit(s) * worst;
  }
  return out;
}

PowerSubproblem build_power_subproblem(const Scenario& s, const LinkGains& g, const PowerOffloadPlan& current) {
  const int K = s.num_users(), N = s.num_slots;
  const double unit = bits_per_rate_unit(s);
  const auto slots = usable_slots(s, g);

  int num_t = 0;
  for (int k = 0; k < K; ++k)
    if (user_can_offload(s, k, slots))
      for (int j = 0; j < K; ++j) num_t += static_cast<int>(slots[k][j].size());

  PowerSubproblem sub;
  const int n_vars = K * N + 2 * K + num_t;
  sub.program = ConvexProgram(n_vars);
  sub.rho_offset = K * N;
  sub.s_offset = K * N + K;
  auto& prog = sub.program;
  sub.start = Eigen::VectorXd::Zero(n_vars);

  int t_next = K * N + 2 * K;
  for (int k = 0; k < K; ++k) {
    const auto& u = s.users[k];
    const int rho = sub.rho_offset + k, sv = sub.s_offset + k;
    const bool active = user_can_offload(s, k, slots);
    const double ibits = u.input_bits / unit;  // task size in B·t_s units

    for (int n = 0; n < N; ++n) {
      const int pi = k * N + n;
      prog.lower[pi] = 0.0;
      prog.upper[pi] = active ? s.p_max : 0.0;
      sub.start[pi] = active ? current.powers[k][n] : 0.0;
      prog.objective.linear.emplace_back(pi, s.slot_length / K);
    }
    prog.lower[rho] = active ? 0.0 : 1.0;
    prog.upper[rho] = 1.0;
    sub.start[rho] = active ? current.ratios[k] : 1.0;
    prog.lower[sv] = 0.0;
    prog.upper[sv] = active ? std::numeric_limits<double>::infinity() : 0.0;
    sub.start[sv] = active ? current.targets[k] / unit : 0.0;

    const double local_coef =
        u.switched_capacitance * std::pow(u.cycles_per_bit * u.input_bits, 3) / (s.mission_time * s.mission_time);
    if (local_coef > 0) {
      prog.objective.terms.push_back({{rho}, [local_coef](const double* x, double& v, double* gr, double* h) {
                                        v = local_coef * x[0] * x[0] * x[0];
                                        gr[0] = 3.0 * local_coef * x[0] * x[0];
                                        h[0] = 6.0 * local_coef * x[0];
                                        return true;
                                      }});
    }
    if (!active) continue;

    SmoothFunction avg;  // Σ_n π ≤ N P_avg
    avg.constant = -1.0;
    for (int n = 0; n < N; ++n) avg.linear.emplace_back(k * N + n, 1.0 / (N * s.p_avg));
    prog.add_inequality(std::move(avg));

    SmoothFunction cover;  // I(1 − ρ) ≤ s
    cover.constant = 1.0;
    cover.linear.emplace_back(rho, -1.0);
    cover.linear.emplace_back(sv, -1.0 / ibits);
    prog.add_inequality(std::move(cover));

    for (int j = 0; j < K; ++j) {
      if (j == k && K > 1) continue;
      SmoothFunction pair;  // s ≤ Σ_n t
      pair.linear.emplace_back(sv, 1.0 / ibits);
      for (int n : slots[k][j]) {
        const int ti = t_next++;
        pair.linear.emplace_back(ti, -1.0 / ibits);

        const int pi = k * N + n;
        const double a = g.legit[k][n];
        const double e = j == k ? 0.0 : g.eve[k][j][n];
        const double pz = current.powers[k][n];
        const double slope = e / (kLn2 * (1.0 + e * pz));
        SmoothFunction slot;  // t − log2(1 + a π) + R̂(π; π_z) ≤ 0
        slot.constant = std::log2(1.0 + e * pz) - slope * pz;
        slot.linear.emplace_back(ti, 1.0);
        slot.linear.emplace_back(pi, slope);
        slot.terms.push_back({{pi}, [a](const double* x, double& v, double* gr, double* h) {
                                const double arg = 1.0 + a * x[0];
                                if (!(arg > 0)) return false;
                                v = -std::log2(arg);
                                gr[0] = -a / (kLn2 * arg);
                                h[0] = a * a / (kLn2 * arg * arg);
                                return true;
                              }});
        const double gap = std::log2(1.0 + a * pz) - std::log2(1.0 + e * pz);
        sub.start[ti] = gap - 1e-3 * std::abs(gap) - 1e-9;
        prog.add_inequality(std::move(slot));
      }
      prog.add_inequality(std::move(pair));
    }
  }
  return sub;
}

Algorithm2Result algorithm2(const Scenario& s, const LinkGains& g, const PowerOffloadPlan& start,
                            const OptimizerOptions& opt) {
  const int K = s.num_users(), N = s.num_slots;
  const double unit = bits_per_rate_unit(s);
  Algorithm2Result out;
  PowerOffloadPlan plan = start;
  double f_cur = total_objective(plan, s);

  for (int z = 0; z < opt.max_inner; ++z) {
    auto sub = build_power_subproblem(s, g, plan);
    auto feas = find_feasible(sub.program, sub.start, opt.solver);
    if (!feas.feasible) break;
    auto res = solve(sub.program, feas.x, opt.solver);
    if (res.status == SolveStatus::infeasible) break;
    out.iterations = z + 1;

    const double alpha = opt.schedule(z);
    PowerOffloadPlan next = plan;
    double change = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int n = 0; n < N; ++n) {
        const double target = std::clamp(res.x[k * N + n], 0.0, s.p_max);
        const double v = plan.powers[k][n] + alpha * (target - plan.powers[k][n]);
        change = std::max(change, std::abs(v - plan.powers[k][n]) / s.p_max);
        next.powers[k][n] = v;
      }
      const double rho_t = std::clamp(res.x[sub.rho_offset + k], 0.0, 1.0);
      next.ratios[k] = plan.ratios[k] + alpha * (rho_t - plan.ratios[k]);
      change = std::max(change, std::abs(next.ratios[k] - plan.ratios[k]));
      const double s_t = std::max(0.0, res.x[sub.s_offset + k]) * unit;
      next.targets[k] = plan.targets[k] + alpha * (s_t - plan.targets[k]);
      change = std::max(change, std::abs(next.targets[k] - plan.targets[k]) / std::max(1.0, s.users[k].input_bits));
    }
    for (int k = 0; k < K; ++k) {
      if (sub.program.upper[k * N] > 0) continue;  // user cannot offload securely
      std::fill(next.powers[k].begin(), next.powers[k].end(), 0.0);
      next.ratios[k] = 1.0;
      next.targets[k] = 0.0;
    }
    const double f_next = total_objective(next, s);
    if (f_next > f_cur + 1e-9 * (1.0 + std::abs(f_cur))) break;
    plan = std::move(next);
    f_cur = f_next;
    if (change < opt.inner_tol) break;
  }

  // Report the tightest admissible target s_k = I_k(1 − ρ_k).
  for (int k = 0; k < K; ++k) plan.targets[k] = std::max(0.0, s.users[k].input_bits * (1.0 - plan.ratios[k]));
  plan.achieved = secure_throughput(s, g, plan.powers);
  out.plan = std::move(plan);
  return out;
}

}  // namespace uavirs
