#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavirs/convex_solver.hpp"
#include "uavirs/energy.hpp"
#include "uavirs/phase_design.hpp"
#include "uavirs/scenario.hpp"

namespace uavirs {

enum class Method { proposed, local_only, identity_phase, fixed_phase, no_traj_opt_phase };

std::string to_string(Method m);
std::optional<Method> parse_method(const std::string& name);

/// α^(z) = α0 / (1 + β z).
struct StepSchedule {
  double alpha0 = 1.0;
  double beta = 0.1;
  double operator()(int z) const { return alpha0 / (1.0 + beta * z); }
};

double step_schedule_default(int z);

struct OptimizerOptions {
  double outer_tol = 1e-4;   // J, absolute change of the user energy
  int max_outer = 50;
  double inner_tol = 1e-5;   // relative iterate change
  int max_inner = 100;
  StepSchedule schedule;
  SolverOptions solver;
};

/// Thrown when the mission itself admits no plan (e.g. the energy budget is
/// below the cheapest admissible flight).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the convex solver fails on a subproblem that must be solvable.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-slot link quality per watt: legit[k][n] = |g_kA|²/σ² and
/// eve[k][j][n] = |g_kj|²/σ² (zero on the diagonal).
struct LinkGains {
  std::vector<std::vector<double>> legit;
  std::vector<std::vector<std::vector<double>>> eve;
};

/// Coherent-combining gains from the trajectory alone (legit and eavesdropper bound).
LinkGains trajectory_gains(const Scenario& s, const Kinematics& kin);

/// Legit gains under a fixed phase schedule, eavesdroppers at the coherent bound.
LinkGains phase_schedule_gains(const Scenario& s, const Kinematics& kin, const PhaseSchedule& phases);

/// Secure bits of user k in slot n: B t_s min_j [log2(1+π a) − log2(1+π e_j)]^+.
std::vector<std::vector<double>> secure_bits_per_slot(const Scenario& s, const LinkGains& g,
                                                      const std::vector<std::vector<double>>& powers);

/// Per-pair secure throughput min_j Σ_n B t_s [R_kA − R_kj]^+, bits.
std::vector<double> secure_throughput(const Scenario& s, const LinkGains& g,
                                      const std::vector<std::vector<double>>& powers);

/// Fixed path used to initialize the SCA and by the no-trajectory baselines.
/// Kinetic model: constant-speed line, or out-and-back towards the mirror
/// image of the start through the AP when start = end. Aerodynamic model:
/// straight line with a raised-sine speed profile, or a boundary-speed loop
/// with a constant drift when the line would fly slower than half the
/// boundary speed. Throws InfeasibleError when limits cannot be met.
Kinematics reference_path(const Scenario& s);

/// Slot owners by largest remaining secrecy deficit, then closed-form coherent
/// phases for each owner (quantized when the scenario sets Q).
PhaseSchedule design_phases(const Scenario& s, const Kinematics& kin, const PowerOffloadPlan& plan);

PhaseSchedule identity_phases(const Scenario& s);

/// Angular sectors around the AP split at the midpoints of adjacent users;
/// each slot uses the phases of the sector containing the UAV, designed for
/// the sector's user with the UAV halfway out along the sector bisector.
PhaseSchedule fixed_sector_phases(const Scenario& s, const Kinematics& kin);

/// Index of the user whose sector contains `xy`.
int sector_of(const Scenario& s, const Eigen::Vector2d& xy);

/// Convex program of one trajectory SCA step with its variable layout and a
/// start point satisfying the equalities. Distance-product slacks are in
/// units of H⁴ and throughput in units of B·t_s bits.
struct TrajectorySubproblem {
  ConvexProgram program;
  Eigen::VectorXd start;
  std::vector<int> pos_index;   // x index of p[n].x, n = 0..N
  std::vector<int> vel_index;   // aerodynamic model only
  std::vector<int> acc_index;
  std::vector<int> nu_index;
  int num_secrecy_terms = 0;
};

TrajectorySubproblem build_trajectory_subproblem(const Scenario& s, const Kinematics& kin,
                                                 const PowerOffloadPlan& plan);

struct Algorithm1Result {
  Kinematics kin;
  PhaseSchedule phases;
  int iterations = 0;
  bool moved = false;
  std::string note;
};

Algorithm1Result algorithm1(const Scenario& s, const Kinematics& kin, const PowerOffloadPlan& plan,
                            const OptimizerOptions& opt = {});

/// Power / offload SCA step; decision vector layout π (K·N), ρ (K), s̃ (K), t.
struct PowerSubproblem {
  ConvexProgram program;
  Eigen::VectorXd start;
  int rho_offset = 0;
  int s_offset = 0;
};

PowerSubproblem build_power_subproblem(const Scenario& s, const LinkGains& g, const PowerOffloadPlan& current);

struct Algorithm2Result {
  PowerOffloadPlan plan;
  int iterations = 0;
};

Algorithm2Result algorithm2(const Scenario& s, const LinkGains& g, const PowerOffloadPlan& start,
                            const OptimizerOptions& opt = {});

struct RunResult {
  Method method = Method::proposed;
  Kinematics kin;
  PhaseSchedule phases;
  PowerOffloadPlan plan;
  std::vector<std::vector<double>> secure_bits;  // [user][slot]
  std::vector<double> trace;                     // user energy per outer iteration
  double user_energy = 0.0;
  double uav_energy = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

RunResult algorithm3(const Scenario& s, const OptimizerOptions& opt = {});
RunResult run_baseline(Method kind, const Scenario& s, const OptimizerOptions& opt = {});
RunResult run_method(Method m, const Scenario& s, const OptimizerOptions& opt = {});

}  // namespace uavirs
