#include "uavirs/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace uavirs {

double LinkParams::steering_step() const { return 2.0 * std::numbers::pi * spacing_ratio; }

ChannelGeometry geometry(const Eigen::Vector2d& uav_xy, const Eigen::Vector3d& node, double altitude) {
  const double dx = uav_xy.x() - node.x();
  const double dy = uav_xy.y() - node.y();
  ChannelGeometry g;
  g.distance = std::sqrt(dx * dx + dy * dy + altitude * altitude);
  g.aoa_cosine = dx / g.distance;
  return g;
}

Eigen::VectorXcd channel_vector(const ChannelGeometry& geom, int num_elements, double spacing_ratio,
                                double ref_gain, LinkDirection direction) {
  const double phi = direction == LinkDirection::to_irs ? geom.aoa_cosine : geom.aoa_cosine_from_irs();
  const double step = 2.0 * std::numbers::pi * spacing_ratio;
  const double amp = std::sqrt(ref_gain) / geom.distance;
  Eigen::VectorXcd h(num_elements);
  for (int l = 0; l < num_elements; ++l) h[l] = std::polar(amp, -step * l * phi);
  return h;
}

std::complex<double> effective_channel(const Eigen::Vector2d& uav_xy, std::span<const double> phases,
                                       const Eigen::Vector3d& from_node, const Eigen::Vector3d& to_node,
                                       const LinkParams& params) {
  if (static_cast<int>(phases.size()) != params.num_elements)
    throw std::invalid_argument("effective_channel: phase vector length != L");
  const auto h_in = channel_vector(geometry(uav_xy, from_node, params.altitude), params.num_elements,
                                   params.spacing_ratio, params.ref_gain, LinkDirection::to_irs);
  const auto h_out = channel_vector(geometry(uav_xy, to_node, params.altitude), params.num_elements,
                                    params.spacing_ratio, params.ref_gain, LinkDirection::from_irs);
  std::complex<double> g{0.0, 0.0};
  for (int l = 0; l < params.num_elements; ++l) g += std::conj(h_out[l]) * std::polar(1.0, phases[l]) * h_in[l];
  return g;
}

double achievable_rate(double power, std::complex<double> gain, double noise_power) {
  return std::log2(1.0 + power * std::norm(gain) / noise_power);
}

SecrecyRate secrecy_rate_uplink(double power, const Eigen::Vector2d& uav_xy, std::span<const double> phases,
                                int user, const Scenario& scenario) {
  const auto params = LinkParams::from(scenario);
  const auto& src = scenario.users[user].position;
  const double r_ka = achievable_rate(power, effective_channel(uav_xy, phases, src, scenario.ap_position, params),
                                      params.noise_power);
  SecrecyRate out{r_ka, -1};
  double strongest = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < scenario.num_users(); ++j) {
    if (j == user) continue;
    const double r_kj = achievable_rate(
        power, effective_channel(uav_xy, phases, src, scenario.users[j].position, params), params.noise_power);
    if (r_kj > strongest) {
      strongest = r_kj;
      out.eavesdropper = j;
    }
  }
  if (out.eavesdropper >= 0) out.rate = std::max(0.0, r_ka - strongest);
  return out;
}

}  // namespace uavirs
