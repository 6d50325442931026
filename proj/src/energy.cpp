#include "uavirs/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavirs {

Kinematics kinematics_from_positions(std::vector<Eigen::Vector2d> positions, double slot_length) {
  Kinematics kin;
  const auto n = positions.size();
  kin.velocities.assign(n, Eigen::Vector2d::Zero());
  kin.accelerations.assign(n > 0 ? n - 1 : 0, Eigen::Vector2d::Zero());
  for (std::size_t i = 0; i + 1 < n; ++i) kin.velocities[i] = (positions[i + 1] - positions[i]) / slot_length;
  kin.positions = std::move(positions);
  return kin;
}

double kinematics_residual(const Kinematics& kin, double slot_length) {
  if (kin.positions.empty()) return 0.0;
  Eigen::Vector2d p = kin.positions.front();
  Eigen::Vector2d v = kin.velocities.front();
  double worst = 0.0;
  for (int n = 0; n < kin.num_slots(); ++n) {
    const Eigen::Vector2d& a = kin.accelerations[n];
    p += v * slot_length + 0.5 * a * slot_length * slot_length;
    v += a * slot_length;
    worst = std::max(worst, (p - kin.positions[n + 1]).norm());
  }
  return worst;
}

double max_step_length(const Kinematics& kin) {
  double worst = 0.0;
  for (int n = 0; n < kin.num_slots(); ++n) worst = std::max(worst, (kin.positions[n + 1] - kin.positions[n]).norm());
  return worst;
}

double comm_energy(double power, double slot_length, int num_users) { return power * slot_length / num_users; }

double local_energy(double switched_capacitance, double cycles_per_bit, double input_bits, double mission_time,
                    double ratio) {
  const double cycles = cycles_per_bit * ratio * input_bits;
  return switched_capacitance * cycles * cycles * cycles / (mission_time * mission_time);
}

double flying_energy_m1(double speed, double mass_kg, double slot_length) {
  return 0.5 * mass_kg * slot_length * speed * speed;
}

double flying_energy_m2(const Eigen::Vector2d& v, const Eigen::Vector2d& a, double kappa1, double kappa2,
                        double gravity) {
  const double speed = v.norm();
  if (!(speed > 0.0)) throw std::domain_error("flying_energy_m2: zero speed");
  return kappa1 * speed * speed * speed + kappa2 / speed * (1.0 + a.squaredNorm() / (gravity * gravity));
}

double aerodynamic_min_power_speed(double kappa1, double kappa2) { return std::pow(kappa2 / (3.0 * kappa1), 0.25); }

std::vector<double> flying_energy_per_slot(const Kinematics& kin, const Scenario& s) {
  std::vector<double> e(kin.num_slots());
  for (int n = 0; n < kin.num_slots(); ++n) {
    if (s.flying_model == FlyingModel::kinetic) {
      const double speed = (kin.positions[n + 1] - kin.positions[n]).norm() / s.slot_length;
      e[n] = flying_energy_m1(speed, s.kinetic.mass_kg, s.slot_length);
    } else {
      Eigen::Vector2d v = kin.velocities[n];
      const double speed = v.norm();
      if (speed < kMinEvalSpeed) v = speed > 0 ? Eigen::Vector2d(v * (kMinEvalSpeed / speed)) : Eigen::Vector2d(kMinEvalSpeed, 0);
      const auto& m2 = s.aerodynamic;
      e[n] = flying_energy_m2(v, kin.accelerations[n], m2.kappa1, m2.kappa2, m2.gravity);
    }
  }
  return e;
}

double total_flying_energy(const Kinematics& kin, const Scenario& s) {
  double total = 0.0;
  for (double e : flying_energy_per_slot(kin, s)) total += e;
  return total;
}

PowerOffloadPlan PowerOffloadPlan::local_only(const Scenario& s) {
  PowerOffloadPlan plan;
  plan.powers.assign(s.num_users(), std::vector<double>(s.num_slots, 0.0));
  plan.ratios.assign(s.num_users(), 1.0);
  plan.targets.assign(s.num_users(), 0.0);
  plan.achieved.assign(s.num_users(), 0.0);
  return plan;
}

double total_objective(const PowerOffloadPlan& plan, const Scenario& s) {
  double total = 0.0;
  for (int k = 0; k < s.num_users(); ++k) {
    for (double p : plan.powers[k]) total += comm_energy(p, s.slot_length, s.num_users());
    const auto& u = s.users[k];
    total += local_energy(u.switched_capacitance, u.cycles_per_bit, u.input_bits, s.mission_time, plan.ratios[k]);
  }
  return total;
}

}  // namespace uavirs
