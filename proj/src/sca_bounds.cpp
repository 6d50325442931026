#include "uavirs/sca_bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace uavirs {
namespace {

constexpr double kLn2 = std::numbers::ln2;

FnEval checked(const DiffFn& f, const Eigen::VectorXd& x, const char* what) {
  FnEval e = f(x);
  if (!std::isfinite(e.value) || !e.grad.allFinite())
    throw std::domain_error(std::string(what) + ": gradient unavailable at linearization point");
  return e;
}

double nonneg(const DiffFn& f, const Eigen::VectorXd& x, const char* what) {
  const double v = f(x).value;
  if (v < 0.0) throw std::domain_error(std::string(what) + ": negative factor");
  return v;
}

}  // namespace

double dc_lower_bound(const DiffFn& f_plus, const DiffFn& f_minus, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& mu) {
  const FnEval m = checked(f_minus, mu, "dc_lower_bound");
  return f_plus(x).value - m.value - m.grad.dot(x - mu);
}

double biconvex_upper(const DiffFn& p1, const DiffFn& p2, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2) {
  const double a = nonneg(p1, x1, "biconvex_upper");
  const double b = nonneg(p2, x2, "biconvex_upper");
  const FnEval a0 = checked(p1, mu1, "biconvex_upper");
  const FnEval b0 = checked(p2, mu2, "biconvex_upper");
  if (a0.value < 0 || b0.value < 0) throw std::domain_error("biconvex_upper: negative factor");
  return 0.5 * (a + b) * (a + b) - 0.5 * (a0.value * a0.value + b0.value * b0.value) -
         a0.value * a0.grad.dot(x1 - mu1) - b0.value * b0.grad.dot(x2 - mu2);
}

double biconvex_lower(const DiffFn& p1, const DiffFn& p2, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& mu1, const Eigen::VectorXd& mu2) {
  const double a = nonneg(p1, x1, "biconvex_lower");
  const double b = nonneg(p2, x2, "biconvex_lower");
  const FnEval a0 = checked(p1, mu1, "biconvex_lower");
  const FnEval b0 = checked(p2, mu2, "biconvex_lower");
  if (a0.value < 0 || b0.value < 0) throw std::domain_error("biconvex_lower: negative factor");
  const double s0 = a0.value + b0.value;
  return 0.5 * s0 * s0 - 0.5 * (a * a + b * b) + s0 * (a0.grad.dot(x1 - mu1) + b0.grad.dot(x2 - mu2));
}

Surrogate<2> secrecy_dc_surrogate(double q, double r, double q_z, double r_z, double c) {
  Surrogate<2> s;
  const double qc = q + c;
  const double rc_z = r_z + c;
  if (!(qc > 0) || !(r > 0) || !(q_z > 0) || !(rc_z > 0)) {
    s.value = -std::numeric_limits<double>::infinity();
    return s;
  }
  s.value = std::log2(qc) + std::log2(r) - std::log2(q_z) - (q - q_z) / (kLn2 * q_z) - std::log2(rc_z) -
            (r - r_z) / (kLn2 * rc_z);
  s.grad << 1.0 / (kLn2 * qc) - 1.0 / (kLn2 * q_z), 1.0 / (kLn2 * r) - 1.0 / (kLn2 * rc_z);
  s.hess << -1.0 / (kLn2 * qc * qc), 0.0, 0.0, -1.0 / (kLn2 * r * r);
  return s;
}

double secrecy_dc_surrogate(double q, double r, double q_z, double r_z, double power, double noise_power,
                            double gain_numerator) {
  if (!(q > 0) || !(r > 0) || !(q_z > 0) || !(r_z > 0)) throw std::domain_error("secrecy_dc_surrogate: nonpositive slack");
  return secrecy_dc_surrogate(q, r, q_z, r_z, gain_numerator * power / noise_power).value;
}

Surrogate<2> fq_surrogate(const Eigen::Vector2d& p, const Eigen::Vector2d& p_z, const Eigen::Vector2d& user,
                          const Eigen::Vector2d& ap, double altitude) {
  const double h2 = altitude * altitude;
  const double a = (p - ap).squaredNorm() + h2;
  const double b = (p - user).squaredNorm() + h2;
  const double a_z = (p_z - ap).squaredNorm() + h2;
  const double b_z = (p_z - user).squaredNorm() + h2;
  const Eigen::Vector2d ga = 2.0 * (p - ap), gb = 2.0 * (p - user);
  const Eigen::Vector2d ga_z = 2.0 * (p_z - ap), gb_z = 2.0 * (p_z - user);
  const Eigen::Vector2d delta = p - p_z;
  Surrogate<2> s;
  s.value = 0.5 * (a + b) * (a + b) - 0.5 * (a_z * a_z + b_z * b_z) - a_z * ga_z.dot(delta) - b_z * gb_z.dot(delta);
  s.grad = (a + b) * (ga + gb) - a_z * ga_z - b_z * gb_z;
  s.hess = (ga + gb) * (ga + gb).transpose() + 4.0 * (a + b) * Eigen::Matrix2d::Identity();
  return s;
}

Surrogate<2> fr_surrogate(const Eigen::Vector2d& p, const Eigen::Vector2d& p_z, const Eigen::Vector2d& user,
                          const Eigen::Vector2d& eavesdropper, double altitude) {
  const double h2 = altitude * altitude;
  const double a = (p - eavesdropper).squaredNorm() + h2;
  const double b = (p - user).squaredNorm() + h2;
  const double a_z = (p_z - eavesdropper).squaredNorm() + h2;
  const double b_z = (p_z - user).squaredNorm() + h2;
  const Eigen::Vector2d ga = 2.0 * (p - eavesdropper), gb = 2.0 * (p - user);
  const Eigen::Vector2d g_z = 2.0 * (p_z - eavesdropper) + 2.0 * (p_z - user);
  const double s_z = a_z + b_z;
  Surrogate<2> s;
  s.value = 0.5 * s_z * s_z - 0.5 * (a * a + b * b) + s_z * g_z.dot(p - p_z);
  s.grad = -a * ga - b * gb + s_z * g_z;
  s.hess = -(ga * ga.transpose() + gb * gb.transpose()) - 2.0 * (a + b) * Eigen::Matrix2d::Identity();
  return s;
}

Surrogate<1> eve_rate_linearized(double power, double power_z, double gain_sq, double noise_power) {
  Surrogate<1> s;
  const double denom = noise_power + power_z * gain_sq;
  s.value = std::log2(1.0 + power_z * gain_sq / noise_power) + gain_sq * (power - power_z) / (kLn2 * denom);
  s.grad(0) = gain_sq / (kLn2 * denom);
  return s;
}

Surrogate<5> propulsion_upper(const Eigen::Vector2d& v, const Eigen::Vector2d& a, double nu,
                              const Eigen::Vector2d& a_z, double nu_z, double kappa1, double kappa2, double gravity) {
  if (!(nu > 0) || !(nu_z > 0)) throw std::domain_error("propulsion_upper: nonpositive speed slack");
  Surrogate<5> s;
  const double g2 = gravity * gravity;
  const double speed = v.norm();

  // κ1‖v‖³
  s.value = kappa1 * speed * speed * speed;
  s.grad.head<2>() = 3.0 * kappa1 * speed * v;
  if (speed > 0) s.hess.topLeftCorner<2, 2>() = 3.0 * kappa1 * (speed * Eigen::Matrix2d::Identity() + v * v.transpose() / speed);

  // κ2/ν
  s.value += kappa2 / nu;
  s.grad(4) += -kappa2 / (nu * nu);
  s.hess(4, 4) += 2.0 * kappa2 / (nu * nu * nu);

  // κ2/(2g²) w², w = ‖a‖² + 1/ν
  const double w = a.squaredNorm() + 1.0 / nu;
  Eigen::Matrix<double, 3, 1> gw;
  gw << 2.0 * a, -1.0 / (nu * nu);
  Eigen::Matrix3d hw = Eigen::Matrix3d::Zero();
  hw(0, 0) = hw(1, 1) = 2.0;
  hw(2, 2) = 2.0 / (nu * nu * nu);
  s.value += 0.5 * kappa2 / g2 * w * w;
  s.grad.tail<3>() += kappa2 / g2 * w * gw;
  s.hess.bottomRightCorner<3, 3>() += kappa2 / g2 * (gw * gw.transpose() + w * hw);

  // Linearization of the subtracted square terms at (a_z, ν_z).
  const double az2 = a_z.squaredNorm();
  s.value -= 0.5 * kappa2 / g2 * (az2 * az2 + 1.0 / (nu_z * nu_z));
  s.value -= kappa2 / g2 * (2.0 * az2 * a_z.dot(a - a_z) - (nu - nu_z) / (nu_z * nu_z * nu_z));
  s.grad.segment<2>(2) -= kappa2 / g2 * 2.0 * az2 * a_z;
  s.grad(4) += kappa2 / (g2 * nu_z * nu_z * nu_z);
  return s;
}

Surrogate<2> speed_sq_lower(const Eigen::Vector2d& v, const Eigen::Vector2d& v_z) {
  Surrogate<2> s;
  s.value = v_z.squaredNorm() + 2.0 * v_z.dot(v - v_z);
  s.grad = 2.0 * v_z;
  return s;
}

}  // namespace uavirs
