#include <algorithm>
#include <cmath>
#include <numbers>

#include "uavirs/optimizer.hpp"
#include "uavirs/sca_bounds.hpp"

namespace uavirs {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLimitShare = 0.95;  // reference paths stay this far inside speed/energy limits
constexpr int kPathNewtonPerStage = 40;

Kinematics kinetic_reference(const Scenario& s) {
  const int N = s.num_slots;
  const Eigen::Vector2d pi = s.initial_xy, pf = s.terminal_xy;
  std::vector<Eigen::Vector2d> pos(N + 1);
  if ((pf - pi).norm() > 0) {
    for (int n = 0; n <= N; ++n) pos[n] = pi + (pf - pi) * (static_cast<double>(n) / N);
    auto kin = kinematics_from_positions(std::move(pos), s.slot_length);
    if (total_flying_energy(kin, s) > s.energy_budget)
      throw InfeasibleError("energy budget below the constant-speed straight-line flight cost");
    return kin;
  }
  // Out-and-back towards the mirror image of the start through the AP.
  Eigen::Vector2d far = 2.0 * s.ap_xy() - pi;
  double reach = (far - pi).norm();
  const double step_cap = kLimitShare * s.d_max;
  const double energy_step_cap =
      kLimitShare * std::sqrt(2.0 * s.energy_budget * s.slot_length / (N * s.kinetic.mass_kg));
  if (reach > 0) {
    const double step = 2.0 * reach / N;
    const double scale = std::min({1.0, step_cap / step, energy_step_cap / step});
    far = pi + (far - pi) * scale;
  }
  for (int n = 0; n <= N; ++n) {
    const double tri = 1.0 - std::abs(2.0 * n / N - 1.0);
    pos[n] = pi + (far - pi) * tri;
  }
  return kinematics_from_positions(std::move(pos), s.slot_length);
}

// Positions by p[n+1] = p[n] + t(v[n] + v[n+1])/2, which is the quadratic
// update with a[n] = (v[n+1] − v[n])/t.
Kinematics integrate_velocities(const Eigen::Vector2d& start, std::vector<Eigen::Vector2d> vel, double t) {
  const int N = static_cast<int>(vel.size()) - 1;
  Kinematics kin;
  kin.positions.resize(N + 1);
  kin.accelerations.resize(N);
  kin.positions[0] = start;
  for (int n = 0; n < N; ++n) {
    kin.accelerations[n] = (vel[n + 1] - vel[n]) / t;
    kin.positions[n + 1] = kin.positions[n] + vel[n] * t + 0.5 * kin.accelerations[n] * t * t;
  }
  kin.velocities = std::move(vel);
  return kin;
}

void check_aerodynamic_limits(const Scenario& s, const Kinematics& kin) {
  const auto& m2 = s.aerodynamic;
  for (int n = 0; n < kin.num_slots(); ++n) {
    if (kin.accelerations[n].norm() > m2.a_max * (1 + 1e-12))
      throw InfeasibleError("reference path needs acceleration above a_max");
    if ((kin.positions[n + 1] - kin.positions[n]).norm() > s.d_max * (1 + 1e-12))
      throw InfeasibleError("reference path exceeds the per-slot distance limit");
  }
  for (const auto& v : kin.velocities) {
    if (v.norm() > s.v_max * (1 + 1e-12)) throw InfeasibleError("reference path exceeds v_max");
    if (v.norm() < kMinEvalSpeed) throw InfeasibleError("reference path stalls below the minimum speed");
  }
  if (total_flying_energy(kin, s) > s.energy_budget)
    throw InfeasibleError("energy budget below the boundary-speed reference flight cost");
}

Kinematics aerodynamic_reference(const Scenario& s) {
  const int N = s.num_slots;
  const double t = s.slot_length;
  const double u = s.aerodynamic.boundary_speed;
  const Eigen::Vector2d pi = s.initial_xy, pf = s.terminal_xy;
  std::vector<Eigen::Vector2d> vel(N + 1);
  const double gap = (pf - pi).norm();
  const double v_cap = kLimitShare * s.v_max;
  // Loop candidate: m turns at speed w plus a constant drift to the end point.
  // Whole turns integrate to zero; w keeps the peak speed w + |drift| in the
  // limit and the start phase makes the boundary speed exactly u.
  const Eigen::Vector2d drift = (pf - pi) / s.mission_time;
  const double dn = drift.norm();
  const double w = dn > 0 ? std::min(u, v_cap - dn) : u;
  // Straight candidate: speed u + h sin(π n/N), n = 0..N.
  const double S = N > 1 ? 1.0 / std::tan(kPi / (2.0 * N)) : 1.0;
  const double h = N > 1 ? (gap / t - N * u) / S : 0.0;
  const double line_min = u + std::min(0.0, h), loop_min = w - dn;
  if (gap > 0 && (line_min >= 0.5 * u || line_min >= loop_min || N < 3)) {
    const Eigen::Vector2d dir = (pf - pi) / gap;
    if (N == 1 && std::abs(gap - u * t) > 1e-9)
      throw InfeasibleError("single-slot mission cannot meet the boundary speed");
    for (int n = 0; n <= N; ++n) vel[n] = dir * (u + h * std::sin(kPi * n / N));
    auto kin = integrate_velocities(pi, std::move(vel), t);
    kin.positions[N] = pf;
    check_aerodynamic_limits(s, kin);
    return kin;
  }
  if (!(w > 0)) throw InfeasibleError("no loop fits between the boundary and maximum speeds");
  const double to_ap = (s.ap_xy() - pi).norm();
  const Eigen::Vector2d inward = to_ap > 0 ? Eigen::Vector2d((s.ap_xy() - pi) / to_ap) : Eigen::Vector2d(1.0, 0.0);
  int best_m = 1;
  double best_err = std::numeric_limits<double>::infinity();
  for (int m = 1; 2 * m < N; ++m) {
    const double accel = 2.0 * w * std::sin(kPi * m / N) / t;
    if (accel > s.aerodynamic.a_max) break;
    const double radius = w * s.mission_time / (2.0 * kPi * m);
    const double err = std::abs(radius - to_ap);
    if (err < best_err) {
      best_err = err;
      best_m = m;
    }
  }
  // Counter-clockwise, curving towards the AP: the inward direction rotated
  // by −90°, then turned to the nearest phase with |w e₀ + drift| = u.
  double phase0 = std::atan2(-inward.x(), inward.y()) + kPi / 2.0;
  if (dn > 0) {
    const double c = std::clamp((u * u - w * w - dn * dn) / (2.0 * w * dn), -1.0, 1.0);
    const double base = std::atan2(drift.y(), drift.x()), phi = std::acos(c);
    auto dist = [&](double a) { return std::abs(std::remainder(a - phase0, 2.0 * kPi)); };
    phase0 = dist(base + phi) <= dist(base - phi) ? base + phi : base - phi;
  }
  for (int n = 0; n <= N; ++n) {
    const double ang = phase0 + 2.0 * kPi * best_m * n / N;
    vel[n] = w * Eigen::Vector2d(std::cos(ang), std::sin(ang)) + drift;
  }
  vel[N] = vel[0];
  auto kin = integrate_velocities(pi, std::move(vel), t);
  kin.positions[N] = pf;
  check_aerodynamic_limits(s, kin);
  return kin;
}

double h4(const Scenario& s) { return std::pow(s.altitude, 4); }

LocalTerm quad_term(std::vector<int> idx, Surrogate<2> (*fn)(const Eigen::Vector2d&, const Eigen::Vector2d&,
                                                               const Eigen::Vector2d&, const Eigen::Vector2d&, double),
                    Eigen::Vector2d p_z, Eigen::Vector2d a, Eigen::Vector2d b, double altitude, double scale) {
  return {std::move(idx), [=](const double* x, double& v, double* g, double* h) {
            const auto e = fn(Eigen::Vector2d(x[0], x[1]), p_z, a, b, altitude);
            v = scale * e.value;
            for (int i = 0; i < 2; ++i) {
              g[i] = scale * e.grad[i];
              for (int j = 0; j < 2; ++j) h[2 * i + j] = scale * e.hess(i, j);
            }
            return true;
          }};
}

// ‖x_b − x_a‖² · scale over the four coordinates (a.x, a.y, b.x, b.y).
LocalTerm diff_sq_term(int a, int b, double scale) {
  return {{a, a + 1, b, b + 1}, [scale](const double* x, double& v, double* g, double* h) {
            const double dx = x[2] - x[0], dy = x[3] - x[1];
            v = scale * (dx * dx + dy * dy);
            const double gx = 2 * scale * dx, gy = 2 * scale * dy;
            g[0] = -gx, g[1] = -gy, g[2] = gx, g[3] = gy;
            const double c = 2 * scale;
            const double H[16] = {c, 0, -c, 0, 0, c, 0, -c, -c, 0, c, 0, 0, -c, 0, c};
            std::copy(H, H + 16, h);
            return true;
          }};
}

LocalTerm sq_norm_term(int a, double scale) {
  return {{a, a + 1}, [scale](const double* x, double& v, double* g, double* h) {
            v = scale * (x[0] * x[0] + x[1] * x[1]);
            g[0] = 2 * scale * x[0], g[1] = 2 * scale * x[1];
            h[0] = h[3] = 2 * scale;
            h[1] = h[2] = 0;
            return true;
          }};
}

// Rebuilds positions and velocities from v[0] and the accelerations so the
// kinematic recursion holds exactly. The accelerations take the least-norm
// change that puts the last position on the terminal point.
void reintegrate(const Scenario& s, Kinematics& kin) {
  const int N = kin.num_slots();
  const double t = s.slot_length;
  Eigen::Vector2d reach = kin.positions.front() + N * t * kin.velocities.front();
  double weight = 0.0;
  for (int n = 0; n < N; ++n) {
    const double c = t * t * (N - n - 0.5);
    reach += c * kin.accelerations[n];
    weight += c * c;
  }
  const Eigen::Vector2d miss = s.terminal_xy - reach;
  for (int n = 0; n < N; ++n) kin.accelerations[n] += (t * t * (N - n - 0.5) / weight) * miss;
  for (int n = 0; n < N; ++n) {
    const Eigen::Vector2d& a = kin.accelerations[n];
    kin.positions[n + 1] = kin.positions[n] + kin.velocities[n] * t + 0.5 * a * t * t;
    kin.velocities[n + 1] = kin.velocities[n] + a * t;
  }
  kin.positions.back() = s.terminal_xy;
}

}  // namespace

Kinematics reference_path(const Scenario& s) {
  return s.flying_model == FlyingModel::kinetic ? kinetic_reference(s) : aerodynamic_reference(s);
}

TrajectorySubproblem build_trajectory_subproblem(const Scenario& s, const Kinematics& kin,
                                                 const PowerOffloadPlan& plan) {
  const int K = s.num_users(), N = s.num_slots;
  const bool aero = s.flying_model == FlyingModel::aerodynamic;
  const double H4 = h4(s);
  const double unit = s.bandwidth_hz * s.slot_length;
  const double c_unit = LinkParams::from(s).coherent_gain() / (s.noise_power_w * H4);
  const double t = s.slot_length;

  // Secrecy triples (k, j, n) whose current trajectory-form secrecy is positive.
  struct Triple { int k, j, n; };
  std::vector<Triple> triples;
  std::vector<std::vector<bool>> need_q(K, std::vector<bool>(N, false));
  std::vector<bool> active(K, false);
  for (int k = 0; k < K; ++k) {
    if (!(plan.targets[k] > 0)) continue;
    active[k] = true;
    for (int n = 0; n < N; ++n) {
      if (!(plan.powers[k][n] > 0)) continue;
      const Eigen::Vector2d& p = kin.positions[n];
      const double d_ua = squared_distance(p, s.ap_position, s.altitude);
      for (int j = 0; j < K; ++j) {
        if (j == k && K > 1) continue;
        if (K > 1 && !(squared_distance(p, s.users[j].position, s.altitude) > d_ua)) continue;
        triples.push_back({k, j, n});
        need_q[k][n] = true;
      }
    }
  }

  // Variable layout.
  int nv = 0;
  TrajectorySubproblem sub;
  for (int n = 0; n <= N; ++n, nv += 2) sub.pos_index.push_back(nv);
  if (aero) {
    for (int n = 0; n <= N; ++n, nv += 2) sub.vel_index.push_back(nv);
    for (int n = 0; n < N; ++n, nv += 2) sub.acc_index.push_back(nv);
    for (int n = 0; n < N; ++n, ++nv) sub.nu_index.push_back(nv);
  }
  std::vector<std::vector<int>> q_index(K, std::vector<int>(N, -1));
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n)
      if (need_q[k][n]) q_index[k][n] = nv++;
  const int r_base = nv;
  nv += static_cast<int>(triples.size());
  const int t_base = nv;
  nv += static_cast<int>(triples.size());
  sub.num_secrecy_terms = static_cast<int>(triples.size());

  sub.program = ConvexProgram(nv);
  auto& prog = sub.program;
  Eigen::VectorXd& x0 = sub.start;
  x0 = Eigen::VectorXd::Zero(nv);

  for (int n = 0; n <= N; ++n) {
    x0.segment<2>(sub.pos_index[n]) = kin.positions[n];
    if (n == 0 || n == N)
      for (int i = 0; i < 2; ++i) prog.lower[sub.pos_index[n] + i] = prog.upper[sub.pos_index[n] + i] = x0[sub.pos_index[n] + i];
  }

  // Distance-product slacks.
  int q_count = 0;
  for (int k = 0; k < K; ++k)
    for (int n = 0; n < N; ++n) {
      const int qi = q_index[k][n];
      if (qi < 0) continue;
      const Eigen::Vector2d& pz = kin.positions[n];
      const double exact = squared_distance(pz, s.ap_position, s.altitude) *
                           squared_distance(pz, s.users[k].position, s.altitude) / H4;
      prog.lower[qi] = 0.0;
      x0[qi] = exact * (1.0 + 1e-3);
      SmoothFunction g;  // (f_q/H⁴ − q̃)/q̃_z ≤ 0
      g.terms.push_back(quad_term({sub.pos_index[n], sub.pos_index[n] + 1}, fq_surrogate, pz, s.user_xy(k), s.ap_xy(),
                                  s.altitude, 1.0 / (H4 * exact)));
      g.linear.emplace_back(qi, -1.0 / exact);
      prog.add_inequality(std::move(g));
      prog.objective.linear.emplace_back(qi, 1.0);
      ++q_count;
    }
  for (auto& [i, a] : prog.objective.linear) a /= std::max(1, q_count);

  // Per-triple eavesdropper slack, secrecy surrogate and per-pair coverage.
  std::vector<std::vector<SmoothFunction>> pair(K, std::vector<SmoothFunction>(K));
  for (std::size_t m = 0; m < triples.size(); ++m) {
    const auto [k, j, n] = triples[m];
    const Eigen::Vector2d& pz = kin.positions[n];
    const int qi = q_index[k][n], ri = r_base + static_cast<int>(m), ti = t_base + static_cast<int>(m);
    const double q_z = squared_distance(pz, s.ap_position, s.altitude) *
                       squared_distance(pz, s.users[k].position, s.altitude) / H4;
    const double c = c_unit * plan.powers[k][n];
    if (K > 1) {
      const double r_z = squared_distance(pz, s.users[j].position, s.altitude) *
                         squared_distance(pz, s.users[k].position, s.altitude) / H4;
      prog.lower[ri] = 0.0;
      x0[ri] = r_z * (1.0 - 1e-3);
      SmoothFunction gr;  // (r̃ − f_r/H⁴)/r̃_z ≤ 0
      gr.terms.push_back(quad_term({sub.pos_index[n], sub.pos_index[n] + 1}, fr_surrogate, pz, s.user_xy(k),
                                   s.user_xy(j), s.altitude, -1.0 / (H4 * r_z)));
      gr.linear.emplace_back(ri, 1.0 / r_z);
      prog.add_inequality(std::move(gr));

      SmoothFunction sec;  // t̃ − Ř(q̃, r̃) ≤ 0
      sec.linear.emplace_back(ti, 1.0);
      sec.terms.push_back({{qi, ri}, [q_z, r_z, c](const double* x, double& v, double* g, double* h) {
                             const auto e = secrecy_dc_surrogate(x[0], x[1], q_z, r_z, c);
                             if (!std::isfinite(e.value)) return false;
                             v = -e.value;
                             g[0] = -e.grad[0], g[1] = -e.grad[1];
                             h[0] = -e.hess(0, 0), h[1] = -e.hess(0, 1), h[2] = -e.hess(1, 0), h[3] = -e.hess(1, 1);
                             return true;
                           }});
      prog.add_inequality(std::move(sec));
      const double start_rate = secrecy_dc_surrogate(x0[qi], x0[ri], q_z, r_z, c).value;
      x0[ti] = start_rate - 1e-3 * std::abs(start_rate);
    } else {
      // Without eavesdroppers: t̃ ≤ log2(q̃ + c) − log2 q̃_z − (q̃ − q̃_z)/(ln2 q̃_z).
      prog.lower[ri] = prog.upper[ri] = 1.0;
      x0[ri] = 1.0;
      SmoothFunction sec;
      sec.linear.emplace_back(ti, 1.0);
      sec.terms.push_back({{qi}, [q_z, c](const double* x, double& v, double* g, double* h) {
                             const double qc = x[0] + c;
                             if (!(qc > 0)) return false;
                             v = -(std::log2(qc) - std::log2(q_z) - (x[0] - q_z) / (std::numbers::ln2 * q_z));
                             g[0] = -(1.0 / (std::numbers::ln2 * qc) - 1.0 / (std::numbers::ln2 * q_z));
                             h[0] = 1.0 / (std::numbers::ln2 * qc * qc);
                             return true;
                           }});
      prog.add_inequality(std::move(sec));
      const double q0 = x0[qi];
      const double start_rate = std::log2(q0 + c) - std::log2(q_z) - (q0 - q_z) / (std::numbers::ln2 * q_z);
      x0[ti] = start_rate - 1e-3 * std::abs(start_rate);
    }
    pair[k][j].linear.emplace_back(ti, -1.0);
  }
  for (int k = 0; k < K; ++k) {
    if (!active[k]) continue;
    const double target = plan.targets[k] / unit;
    for (int j = 0; j < K; ++j) {
      if (j == k && K > 1) continue;
      SmoothFunction g = std::move(pair[k][j]);  // 1 − Σ_n t̃/s̃ ≤ 0
      for (auto& [i, a] : g.linear) a /= target;
      g.constant = 1.0;
      prog.add_inequality(std::move(g));
    }
  }

  // Mobility.
  const double d2 = s.d_max * s.d_max;
  for (int n = 0; n < N; ++n) {
    SmoothFunction g;
    g.constant = -1.0;
    g.terms.push_back(diff_sq_term(sub.pos_index[n], sub.pos_index[n + 1], 1.0 / d2));
    prog.add_inequality(std::move(g));
  }

  if (!aero) {
    SmoothFunction budget;  // Σ ½ m ‖Δp‖²/t_s ≤ E_th
    budget.constant = -1.0;
    const double coef = 0.5 * s.kinetic.mass_kg / t / s.energy_budget;
    for (int n = 0; n < N; ++n) budget.terms.push_back(diff_sq_term(sub.pos_index[n], sub.pos_index[n + 1], coef));
    prog.add_inequality(std::move(budget));
    return sub;
  }

  // Aerodynamic model: kinematics, acceleration/speed limits, speed slack, budget.
  const auto& m2 = s.aerodynamic;
  for (int n = 0; n <= N; ++n) {
    const int vi = sub.vel_index[n];
    x0.segment<2>(vi) = kin.velocities[n];
    if (n == 0 || n == N)
      for (int i = 0; i < 2; ++i) prog.lower[vi + i] = prog.upper[vi + i] = x0[vi + i];
  }
  for (int n = 0; n < N; ++n) x0.segment<2>(sub.acc_index[n]) = kin.accelerations[n];

  std::vector<Eigen::Triplet<double>> eq;
  for (int n = 0; n < N; ++n) {
    const int row = 4 * n;
    for (int i = 0; i < 2; ++i) {
      // p[n+1] − p[n] − t v[n] − ½ t² a[n] = 0
      eq.emplace_back(row + i, sub.pos_index[n + 1] + i, 1.0);
      eq.emplace_back(row + i, sub.pos_index[n] + i, -1.0);
      eq.emplace_back(row + i, sub.vel_index[n] + i, -t);
      eq.emplace_back(row + i, sub.acc_index[n] + i, -0.5 * t * t);
      // v[n+1] − v[n] − t a[n] = 0
      eq.emplace_back(row + 2 + i, sub.vel_index[n + 1] + i, 1.0);
      eq.emplace_back(row + 2 + i, sub.vel_index[n] + i, -1.0);
      eq.emplace_back(row + 2 + i, sub.acc_index[n] + i, -t);
    }
  }
  prog.eq_matrix.resize(4 * N, nv);
  prog.eq_matrix.setFromTriplets(eq.begin(), eq.end());
  prog.eq_rhs = prog.eq_matrix * x0;  // fixed endpoints contribute the constants

  SmoothFunction budget;
  budget.constant = -1.0;
  const double amax2 = m2.a_max * m2.a_max, vmax2 = s.v_max * s.v_max;
  for (int n = 0; n < N; ++n) {
    const int vi = sub.vel_index[n], ai = sub.acc_index[n], ni = sub.nu_index[n];
    const Eigen::Vector2d v_z = kin.velocities[n], a_z = kin.accelerations[n];
    const double nu_z = std::max(v_z.norm(), kMinEvalSpeed);
    prog.lower[ni] = kMinEvalSpeed;
    prog.upper[ni] = s.v_max;
    x0[ni] = std::clamp(nu_z * (1.0 - 1e-3), kMinEvalSpeed * (1 + 1e-3), s.v_max * (1 - 1e-3));

    SmoothFunction acc;  // ‖a‖² ≤ a_max²
    acc.constant = -1.0;
    acc.terms.push_back(sq_norm_term(ai, 1.0 / amax2));
    prog.add_inequality(std::move(acc));
    if (n > 0) {
      SmoothFunction spd;  // ‖v‖² ≤ v_max²
      spd.constant = -1.0;
      spd.terms.push_back(sq_norm_term(vi, 1.0 / vmax2));
      prog.add_inequality(std::move(spd));
    }
    SmoothFunction slack;  // ν² ≤ f_LB(v; v_z)
    slack.terms.push_back({{ni}, [vmax2](const double* x, double& v, double* g, double* h) {
                             v = x[0] * x[0] / vmax2;
                             g[0] = 2 * x[0] / vmax2;
                             h[0] = 2 / vmax2;
                             return true;
                           }});
    slack.constant = v_z.squaredNorm() / vmax2;  // −f_LB = −‖v_z‖² − 2v_zᵀ(v − v_z)
    slack.linear.emplace_back(vi, -2.0 * v_z.x() / vmax2);
    slack.linear.emplace_back(vi + 1, -2.0 * v_z.y() / vmax2);
    prog.add_inequality(std::move(slack));

    const double scale = 1.0 / s.energy_budget;
    budget.terms.push_back({{vi, vi + 1, ai, ai + 1, ni},
                            [=](const double* x, double& v, double* g, double* h) {
                              if (!(x[4] > 0)) return false;
                              const auto e = propulsion_upper(Eigen::Vector2d(x[0], x[1]), Eigen::Vector2d(x[2], x[3]),
                                                              x[4], a_z, nu_z, m2.kappa1, m2.kappa2, m2.gravity);
                              v = scale * e.value;
                              for (int i = 0; i < 5; ++i) {
                                g[i] = scale * e.grad[i];
                                for (int j = 0; j < 5; ++j) h[5 * i + j] = scale * e.hess(i, j);
                              }
                              return true;
                            }});
  }
  prog.add_inequality(std::move(budget));
  return sub;
}

Algorithm1Result algorithm1(const Scenario& s, const Kinematics& kin, const PowerOffloadPlan& plan,
                            const OptimizerOptions& opt) {
  Algorithm1Result out;
  out.kin = kin;
  const bool aero = s.flying_model == FlyingModel::aerodynamic;
  const int N = s.num_slots;
  const bool any_demand = std::any_of(plan.targets.begin(), plan.targets.end(), [](double v) { return v > 0; });
  if (!any_demand) {
    out.note = "no secrecy demand";
    out.phases = design_phases(s, out.kin, plan);
    return out;
  }
  // The path subproblem has long flat valleys in the acceleration variables
  // where late barrier stages creep; a damped step does not need them.
  SolverOptions solver = opt.solver;
  solver.max_newton = std::min(solver.max_newton, kPathNewtonPerStage);
  for (int z = 0; z < opt.max_inner; ++z) {
    auto sub = build_trajectory_subproblem(s, out.kin, plan);
    if (sub.num_secrecy_terms == 0) {
      out.note = "no positive-secrecy slot";
      break;
    }
    auto feas = find_feasible(sub.program, sub.start, opt.solver);
    if (!feas.feasible) {
      out.note = "no strictly feasible trajectory step";
      break;
    }
    auto res = solve(sub.program, feas.x, solver);
    if (res.status == SolveStatus::infeasible) {
      out.note = "subproblem infeasible";
      break;
    }
    out.iterations = z + 1;
    const double alpha = opt.schedule(z);
    Kinematics next = out.kin;
    double change = 0.0, scale = 1.0;
    for (int n = 0; n <= N; ++n) {
      const Eigen::Vector2d target = res.x.segment<2>(sub.pos_index[n]);
      next.positions[n] = out.kin.positions[n] + alpha * (target - out.kin.positions[n]);
      change = std::max(change, (next.positions[n] - out.kin.positions[n]).lpNorm<Eigen::Infinity>());
      scale = std::max(scale, out.kin.positions[n].lpNorm<Eigen::Infinity>());
    }
    next.positions.front() = s.initial_xy;
    next.positions.back() = s.terminal_xy;
    if (aero) {
      for (int n = 0; n <= N; ++n) {
        const Eigen::Vector2d v = res.x.segment<2>(sub.vel_index[n]);
        next.velocities[n] = out.kin.velocities[n] + alpha * (v - out.kin.velocities[n]);
      }
      for (int n = 0; n < N; ++n) {
        const Eigen::Vector2d a = res.x.segment<2>(sub.acc_index[n]);
        next.accelerations[n] = out.kin.accelerations[n] + alpha * (a - out.kin.accelerations[n]);
      }
      reintegrate(s, next);
    } else {
      next = kinematics_from_positions(std::move(next.positions), s.slot_length);
    }
    out.kin = std::move(next);
    out.moved = true;
    if (change / scale < opt.inner_tol) break;
  }
  out.phases = design_phases(s, out.kin, plan);
  return out;
}

}  // namespace uavirs
