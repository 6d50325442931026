#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace uavirs {

/// Raised for malformed scenario documents and violated invariants.
/// `field()` names the offending key, e.g. "mission.duration_s".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& rule)
      : std::runtime_error(field + ": " + rule), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GroundUser {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m, z = 0
  double input_bits = 0.0;                             // I_k
  double cycles_per_bit = 1550.7;                      // C_k
  double switched_capacitance = 1e-26;                 // γ_k, J·s²/cycle³

  bool operator==(const GroundUser&) const = default;
};

enum class FlyingModel { kinetic = 1, aerodynamic = 2 };

// Kinetic-energy model, E = ½ m t_s ‖v‖².
struct KineticModelParams {
  double mass_kg = 9.75;

  bool operator==(const KineticModelParams&) const = default;
};

// Fixed-wing aerodynamic model, E = κ1‖v‖³ + κ2/‖v‖ (1 + ‖a‖²/g²).
struct AerodynamicModelParams {
  double kappa1 = 0.0822;
  double kappa2 = 111.57;
  double gravity = 9.8;
  double a_max = 5.0;
  double boundary_speed = 7.54;

  bool operator==(const AerodynamicModelParams&) const = default;
};

/// Every physical constant and node coordinate of one mission.
///
/// Immutable after `load_scenario`/`validate`; the derived members are
/// recomputed by `finalize()` and never parsed.
struct Scenario {
  std::vector<GroundUser> users;
  Eigen::Vector3d ap_position = Eigen::Vector3d::Zero();
  double altitude = 90.0;         // H, m
  double mission_time = 100.0;    // T, s
  double slot_length = 1.0;       // t_s, s
  double v_max = 10.0;            // m/s
  Eigen::Vector2d initial_xy = Eigen::Vector2d::Zero();
  Eigen::Vector2d terminal_xy = Eigen::Vector2d::Zero();
  int num_elements = 16;                // L
  std::optional<int> phase_levels;      // Q; nullopt = continuous
  double spacing_ratio = 0.5;           // d/λ
  double ref_gain = 3.1622776601683794e-4;  // g0 (linear, at 1 m)
  double noise_density_dbm_hz = -174.0;
  double bandwidth_hz = 0.25e6;         // B_kA per user
  double p_avg = 1.0;                   // W
  double p_max = 10.0;                  // W
  double energy_budget = 20000.0;       // E_th, J
  FlyingModel flying_model = FlyingModel::kinetic;
  KineticModelParams kinetic;
  AerodynamicModelParams aerodynamic;

  // Derived (cached by finalize()).
  int num_slots = 0;            // N_s
  double d_max = 0.0;           // v_max · t_s
  double noise_power_w = 0.0;   // σ²
  double steering_step = 0.0;   // k_w · d = 2π d/λ

  int num_users() const { return static_cast<int>(users.size()); }
  Eigen::Vector2d user_xy(int k) const { return users[k].position.head<2>(); }
  Eigen::Vector2d ap_xy() const { return ap_position.head<2>(); }

  /// Checks every invariant and fills the derived members.
  /// Throws ScenarioError naming the field and the violated rule.
  void finalize();

  bool operator==(const Scenario& other) const;
};

/// AWGN power in watts from a density in dBm/Hz over `bandwidth_hz`.
double noise_power(double density_dbm_hz, double bandwidth_hz);

double dbm_to_watt(double dbm);

Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::string& path);

/// Serializes every primary field so that load_scenario(emit_scenario(s)) == s.
std::string emit_scenario(const Scenario& s);

/// Default link, energy and flight parameters with the 180 m × 180 m four-user layout
/// (users at (±90, ±90), 5 Mbit each, start/end at (-90, 0)).
Scenario reference_square_scenario(double mission_time = 100.0, double half_side = 90.0);

}  // namespace uavirs
