#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace uavirs {

/// A smooth function of a few variables. `eval` receives the gathered values
/// x[index[i]], writes the value, the gradient (|index|) and the row-major
/// Hessian (|index|²), and returns false outside its domain.
struct LocalTerm {
  std::vector<int> index;
  std::function<bool(const double* x, double& value, double* grad, double* hess)> eval;
};

/// constant + Σ linear + Σ local terms.
struct SmoothFunction {
  double constant = 0.0;
  std::vector<std::pair<int, double>> linear;
  std::vector<LocalTerm> terms;

  /// Returns false if any term is out of domain or non-finite.
  bool value(const Eigen::VectorXd& x, double& out) const;
  /// Distinct variable indices touched by this function.
  std::vector<int> support() const;
};

/// min f0(x) s.t. g_i(x) ≤ 0, A x = b, lower ≤ x ≤ upper.
/// Infinite bounds are allowed; lower == upper fixes a variable.
struct ConvexProgram {
  int num_vars = 0;
  Eigen::VectorXd lower, upper;
  SmoothFunction objective;
  std::vector<SmoothFunction> inequalities;
  Eigen::SparseMatrix<double> eq_matrix;  // rows × num_vars, may be empty
  Eigen::VectorXd eq_rhs;

  explicit ConvexProgram(int n = 0);
  int add_inequality(SmoothFunction g);
};

enum class SolveStatus { optimal, infeasible, max_iter };
std::string to_string(SolveStatus s);

struct SolverOptions {
  double tol = 1e-7;
  int max_newton = 200;   // per barrier stage
  double mu = 10.0;
  int max_stages = 60;
  double feasibility_margin = 1e-7;
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::max_iter;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double max_violation = 0.0;      // max(0, g_i(x), bound violations)
  double stationarity = 0.0;       // ‖∇L‖∞ / (1 + ‖∇f‖∞)
  double duality_gap = 0.0;        // m/t at exit
  int newton_steps = 0;
  std::vector<double> stage_objectives;
};

/// Log-barrier interior point with Newton steps. `start` must lie strictly
/// inside the box and the inequalities and satisfy A x = b.
SolveResult solve(const ConvexProgram& program, const Eigen::VectorXd& start, const SolverOptions& options = {});

struct FeasibilityResult {
  Eigen::VectorXd x;
  bool feasible = false;
  double max_constraint = 0.0;  // max_i g_i at x
  int newton_steps = 0;
};

/// Phase I: minimizes u subject to g_i(x) ≤ u until u < −margin.
/// `start` must satisfy A x = b; it is pulled strictly inside the box.
FeasibilityResult find_feasible(const ConvexProgram& program, const Eigen::VectorXd& start,
                                const SolverOptions& options = {});

/// max_i g_i(x), or +inf when some g_i is out of domain. −inf without inequalities.
double max_constraint_value(const ConvexProgram& program, const Eigen::VectorXd& x);

}  // namespace uavirs
