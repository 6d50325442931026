#include "uavirs/phase_design.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uavirs {

double wrap_phase(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta, two_pi);
  if (w < 0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

std::vector<double> optimal_phases(const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                   const Eigen::Vector3d& ap, int num_elements, double spacing_ratio,
                                   double altitude, double omega) {
  const double phi_ku = geometry(uav_xy, user, altitude).aoa_cosine;
  const double phi_ua = geometry(uav_xy, ap, altitude).aoa_cosine_from_irs();
  const double step = 2.0 * std::numbers::pi * spacing_ratio * (phi_ku - phi_ua);
  std::vector<double> theta(num_elements);
  for (int l = 0; l < num_elements; ++l) theta[l] = wrap_phase(step * l + omega);
  return theta;
}

std::vector<double> quantize_phases(std::span<const double> phases, int levels) {
  if (levels < 2) throw std::invalid_argument("quantize_phases: Q must be >= 2");
  const double delta = 2.0 * std::numbers::pi / levels;
  std::vector<double> out;
  out.reserve(phases.size());
  for (double theta : phases) {
    const double x = wrap_phase(theta) / delta;
    long idx = static_cast<long>(std::ceil(x - 0.5)) % levels;
    out.push_back(idx * delta);
  }
  return out;
}

double rate_user_trajectory_form(double power, const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                 const Eigen::Vector3d& ap, const LinkParams& params) {
  const double prod = squared_distance(uav_xy, ap, params.altitude) * squared_distance(uav_xy, user, params.altitude);
  return std::log2(1.0 + power * params.coherent_gain() / (params.noise_power * prod));
}

double rate_eve_trajectory_bound(double power, const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& user,
                                 const Eigen::Vector3d& eavesdropper, const LinkParams& params) {
  const double prod =
      squared_distance(uav_xy, eavesdropper, params.altitude) * squared_distance(uav_xy, user, params.altitude);
  return std::log2(1.0 + power * params.coherent_gain() / (params.noise_power * prod));
}

}  // namespace uavirs
