#pragma once

#include <vector>

#include <Eigen/Core>

#include "uavirs/scenario.hpp"

namespace uavirs {

/// Evaluation floor for the aerodynamic model's 1/‖v‖ term, m/s.
inline constexpr double kMinEvalSpeed = 0.1;

/// Per-slot UAV state. positions and velocities hold N_s + 1 entries,
/// accelerations N_s. Under the kinetic model velocities[n] is the mean
/// velocity (p[n+1] − p[n])/t_s over slot n, the last entry and all
/// accelerations are zero.
struct Kinematics {
  std::vector<Eigen::Vector2d> positions;
  std::vector<Eigen::Vector2d> velocities;
  std::vector<Eigen::Vector2d> accelerations;

  int num_slots() const { return static_cast<int>(positions.size()) - 1; }
};

/// Kinetic-model kinematics from positions alone.
Kinematics kinematics_from_positions(std::vector<Eigen::Vector2d> positions, double slot_length);

/// Integrates p[n+1] = p[n] + v[n] t_s + ½ a[n] t_s², v[n+1] = v[n] + a[n] t_s
/// from the first state and returns the largest position mismatch, m.
double kinematics_residual(const Kinematics& kin, double slot_length);

/// Largest per-slot displacement, m.
double max_step_length(const Kinematics& kin);

double comm_energy(double power, double slot_length, int num_users);

double local_energy(double switched_capacitance, double cycles_per_bit, double input_bits, double mission_time,
                    double ratio);

double flying_energy_m1(double speed, double mass_kg, double slot_length);

/// Aerodynamic per-slot energy κ1‖v‖³ + κ2/‖v‖ (1 + ‖a‖²/g²). Throws on ‖v‖ = 0.
double flying_energy_m2(const Eigen::Vector2d& v, const Eigen::Vector2d& a, double kappa1, double kappa2,
                        double gravity);

/// argmin_s κ1 s³ + κ2/s = (κ2/(3κ1))^(1/4).
double aerodynamic_min_power_speed(double kappa1, double kappa2);

/// Flying energy of every slot under the scenario's model. The aerodynamic
/// model clamps ‖v‖ to kMinEvalSpeed.
std::vector<double> flying_energy_per_slot(const Kinematics& kin, const Scenario& s);
double total_flying_energy(const Kinematics& kin, const Scenario& s);

/// Per-user powers, offloading ratios and secrecy throughput bookkeeping.
struct PowerOffloadPlan {
  std::vector<std::vector<double>> powers;  // [user][slot], W
  std::vector<double> ratios;               // ρ_k
  std::vector<double> targets;              // s_k, bits
  std::vector<double> achieved;             // secure bits delivered per user

  static PowerOffloadPlan local_only(const Scenario& s);
};

/// Σ_k Σ_n π_k[n] t_s/K + Σ_k γ_k C_k³ (ρ_k I_k)³/T².
double total_objective(const PowerOffloadPlan& plan, const Scenario& s);

}  // namespace uavirs
