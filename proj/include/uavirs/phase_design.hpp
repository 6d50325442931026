#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uavirs/channel.hpp"

namespace uavirs {

/// Per-slot, per-element IRS phases in [0, 2π). Unit reflection amplitude is implicit.
struct PhaseSchedule {
  std::vector<std::vector<double>> phases;  // [slot][element]
  std::vector<int> owner;                   // user each slot's phases serve, −1 if none
  std::optional<int> levels;                // Q when quantized
};

double wrap_phase(double theta);

/// Coherent-combining phases for user → AP: θ_l = k_w d (l−1)(φ_kU − φ_UA) + ω.
std::vector<double> optimal_phases(const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                   const Eigen::Vector3d& ap, int num_elements, double spacing_ratio,
                                   double altitude, double omega = 0.0);

/// Rounds to the nearest of {0, Δθ, …, (Q−1)Δθ}, Δθ = 2π/Q; ties go to the lower level.
std::vector<double> quantize_phases(std::span<const double> phases, int levels);

/// Trajectory-only legitimate rate under coherent combining:
/// log2(1 + π g0² L² / (σ² d_UA² d_kU²)).
double rate_user_trajectory_form(double power, const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                 const Eigen::Vector3d& ap, const LinkParams& params);

/// Coherent upper bound on eavesdropper j's rate: log2(1 + π g0² L² / (σ² d_Uj² d_kU²)).
double rate_eve_trajectory_bound(double power, const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                 const Eigen::Vector3d& eavesdropper, const LinkParams& params);

/// Squared distance d² = ‖p_U − p_i‖² + H².
inline double squared_distance(const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& node, double altitude) {
  return (uav_xy - node.head<2>()).squaredNorm() + altitude * altitude;
}

}  // namespace uavirs
