#pragma once

#include <complex>
#include <span>

#include <Eigen/Core>

#include "uavirs/scenario.hpp"

namespace uavirs {

/// UAV–ground-node distance and AoA cosine for one slot.
struct ChannelGeometry {
  double distance = 0.0;     // d_Ui = d_iU ≥ H
  double aoa_cosine = 0.0;   // φ_iU = (x_U − x_i)/d

  double aoa_cosine_from_irs() const { return -aoa_cosine; }  // φ_Ui
};

enum class LinkDirection { to_irs, from_irs };

/// Array and propagation constants shared by every channel evaluation.
struct LinkParams {
  double altitude = 90.0;
  int num_elements = 16;
  double spacing_ratio = 0.5;
  double ref_gain = 3.1622776601683794e-4;
  double noise_power = 9.95e-16;

  static LinkParams from(const Scenario& s) {
    return {s.altitude, s.num_elements, s.spacing_ratio, s.ref_gain, s.noise_power_w};
  }
  double steering_step() const;
  /// g0² L², the coherent cascaded gain numerator.
  double coherent_gain() const {
    return ref_gain * ref_gain * static_cast<double>(num_elements) * num_elements;
  }
};

ChannelGeometry geometry(const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& node, double altitude);

/// Steering vector sqrt(g0)/d · exp(−j k_w d (l−1) φ), l = 1..L.
Eigen::VectorXcd channel_vector(const ChannelGeometry& geom, int num_elements, double spacing_ratio,
                                double ref_gain, LinkDirection direction);

/// Cascaded gain h_{U,to}^H Θ h_{from,U}.
std::complex<double> effective_channel(const Eigen::Vector2d& uav_xy, std::span<const double> phases,
                                       const Eigen::Vector3d& from_node, const Eigen::Vector3d& to_node,
                                       const LinkParams& params);

/// log2(1 + π |g|²/σ²), bits/s/Hz.
double achievable_rate(double power, std::complex<double> gain, double noise_power);

struct SecrecyRate {
  double rate = 0.0;       // bits/s/Hz, ≥ 0
  int eavesdropper = -1;   // binding j, −1 when K = 1
};

/// Uplink secrecy rate of user k with the exact cascaded channels of every
/// other user acting as eavesdropper: min_j [R_kA − R_kj]^+.
SecrecyRate secrecy_rate_uplink(double power, const Eigen::Vector2d& uav_xy, std::span<const double> phases,
                                int user, const Scenario& scenario);

}  // namespace uavirs
