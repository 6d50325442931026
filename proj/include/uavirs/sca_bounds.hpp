#pragma once

#include <functional>

#include <Eigen/Core>

namespace uavirs {

/// Value and gradient of a differentiable scalar function.
struct FnEval {
  double value = 0.0;
  Eigen::VectorXd grad;
};
using DiffFn = std::function<FnEval(const Eigen::VectorXd&)>;

/// f⁺(x) − f⁻(μ) − ∇f⁻(μ)ᵀ(x − μ) for concave f⁺, f⁻. Never exceeds f⁺(x) − f⁻(x).
double dc_lower_bound(const DiffFn& f_plus, const DiffFn& f_minus, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& mu);

/// Upper bound on p1(x1)p2(x2) for convex nonnegative p1, p2:
/// ½(p1+p2)² − ½(p1(μ1)² + p2(μ2)²) − p1(μ1)∇p1(μ1)ᵀ(x1−μ1) − p2(μ2)∇p2(μ2)ᵀ(x2−μ2).
double biconvex_upper(const DiffFn& p1, const DiffFn& p2, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2);

/// Lower bound on p1(x1)p2(x2):
/// ½(p1(μ1)+p2(μ2))² − ½(p1² + p2²) + (p1(μ1)+p2(μ2))(∇p1(μ1)ᵀ(x1−μ1) + ∇p2(μ2)ᵀ(x2−μ2)).
double biconvex_lower(const DiffFn& p1, const DiffFn& p2, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2);

/// Value, gradient and Hessian of a surrogate in a small fixed dimension.
template <int N>
struct Surrogate {
  double value = 0.0;
  Eigen::Matrix<double, N, 1> grad = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> hess = Eigen::Matrix<double, N, N>::Zero();
};

/// Secrecy DC surrogate in (q, r):
///   log2(q + c) + log2(r) − log2(q_z) − (q − q_z)/(ln2 q_z)
///   − log2(r_z + c) − (r − r_z)/(ln2 (r_z + c)),
/// with c = g0²L²π/σ² expressed in the same units as q and r. Dividing σ²-weighted
/// arguments through by σ² leaves every term unchanged.
/// Concave; returns value = −inf when q + c, r, q_z or r_z + c is not positive.
Surrogate<2> secrecy_dc_surrogate(double q, double r, double q_z, double r_z, double c);

/// Physical-units convenience: c = gain_numerator·π/σ² with gain_numerator = g0²L².
double secrecy_dc_surrogate(double q, double r, double q_z, double r_z, double power, double noise_power,
                            double gain_numerator);

/// Convex upper surrogate of d_UA²·d_kU² in p_U (m⁴).
Surrogate<2> fq_surrogate(const Eigen::Vector2d& p, const Eigen::Vector2d& p_z, const Eigen::Vector2d& user,
                          const Eigen::Vector2d& ap, double altitude);

/// Concave lower surrogate of d_Uj²·d_kU² in p_U (m⁴).
Surrogate<2> fr_surrogate(const Eigen::Vector2d& p, const Eigen::Vector2d& p_z, const Eigen::Vector2d& user,
                          const Eigen::Vector2d& eavesdropper, double altitude);

/// Tangent upper bound on log2(1 + π|g|²/σ²) at π_z. Derivative in π returned in grad.
Surrogate<1> eve_rate_linearized(double power, double power_z, double gain_sq, double noise_power);

/// Convex upper bound on κ1‖v‖³ + κ2/ν (1 + ‖a‖²/g²), variables ordered (v, a, ν).
Surrogate<5> propulsion_upper(const Eigen::Vector2d& v, const Eigen::Vector2d& a, double nu,
                              const Eigen::Vector2d& a_z, double nu_z, double kappa1, double kappa2, double gravity);

/// ‖v_z‖² + 2 v_zᵀ(v − v_z), a lower bound on ‖v‖².
Surrogate<2> speed_sq_lower(const Eigen::Vector2d& v, const Eigen::Vector2d& v_z);

}  // namespace uavirs
