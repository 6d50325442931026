// Randomized property suites shared by the unit tests and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "uavirs/channel.hpp"
#include "uavirs/phase_design.hpp"
#include "uavirs/sca_bounds.hpp"

namespace uavirs::testing {

struct BoundReport {
  std::string op;
  long draws = 0;
  long violations = 0;        // bound on the wrong side of the exact function
  double max_tight_err = 0.0;  // relative value error at the linearization point
  double max_grad_err = 0.0;   // relative gradient error vs central differences
};

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

// Five-point central stencil.
inline Eigen::VectorXd central_difference(const ScalarFn& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-3 * std::max(std::abs(x[i]), 1e-2);
    auto at = [&](double step) {
      Eigen::VectorXd y = x;
      y[i] += step;
      return f(y);
    };
    g[i] = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  }
  return g;
}

inline double grad_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
  return (analytic - fd).lpNorm<Eigen::Infinity>() / std::max(analytic.lpNorm<Eigen::Infinity>(), 1e-300);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Side check with a round-off allowance relative to the magnitudes involved.
inline bool below(double bound, double exact) { return bound <= exact + 1e-10 * std::max(1.0, std::abs(exact)); }

/// Every SCA bound: inequality direction on random draws, tightness at the
/// linearization point and gradients against central differences.
inline std::vector<BoundReport> run_surrogate_suite(int draws, unsigned seed = 20240611u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto vec2 = [&](double r) { return Eigen::Vector2d(uniform(-r, r), uniform(-r, r)); };
  auto disc = [&](double r) {
    const double rad = r * std::sqrt(unit(rng)), ang = uniform(0, 2 * std::numbers::pi);
    return Eigen::Vector2d(rad * std::cos(ang), rad * std::sin(ang));
  };
  std::vector<BoundReport> out;

  {  // DC bound on the secrecy-rate pair log2(x0 + c) + log2(x1) − [log2(x0) + log2(x1 + c)].
    BoundReport rep{"dc_lower_bound"};
    for (int i = 0; i < draws; ++i) {
      const double c = log_uniform(1e-2, 1e2);
      const DiffFn fp = [c](const Eigen::VectorXd& x) {
        FnEval e;
        e.value = std::log2(x[0] + c) + std::log2(x[1]);
        e.grad = Eigen::Vector2d(1 / (std::numbers::ln2 * (x[0] + c)), 1 / (std::numbers::ln2 * x[1]));
        return e;
      };
      const DiffFn fm = [c](const Eigen::VectorXd& x) {
        FnEval e;
        e.value = std::log2(x[0]) + std::log2(x[1] + c);
        e.grad = Eigen::Vector2d(1 / (std::numbers::ln2 * x[0]), 1 / (std::numbers::ln2 * (x[1] + c)));
        return e;
      };
      const Eigen::VectorXd x = Eigen::Vector2d(log_uniform(1e-2, 1e2), log_uniform(1e-2, 1e2));
      const Eigen::VectorXd mu = Eigen::Vector2d(log_uniform(1e-2, 1e2), log_uniform(1e-2, 1e2));
      const auto f = [&](const Eigen::VectorXd& y) { return fp(y).value - fm(y).value; };
      if (!below(dc_lower_bound(fp, fm, x, mu), f(x))) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(dc_lower_bound(fp, fm, mu, mu), f(mu)));
      const Eigen::VectorXd exact_grad = fp(mu).grad - fm(mu).grad;
      const auto bound_at = [&](const Eigen::VectorXd& y) { return dc_lower_bound(fp, fm, y, mu); };
      rep.max_grad_err = std::max(rep.max_grad_err, grad_error(exact_grad, central_difference(bound_at, mu)));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  // Squared distances to fixed ground points: the products the biconvex bounds cover.
  auto sqdist = [](Eigen::Vector2d node, double h2) -> DiffFn {
    return [node, h2](const Eigen::VectorXd& x) {
      FnEval e;
      e.value = (x.head<2>() - node).squaredNorm() + h2;
      e.grad = 2.0 * (x.head<2>() - node);
      return e;
    };
  };
  for (bool upper : {true, false}) {
    BoundReport rep{upper ? "biconvex_upper" : "biconvex_lower"};
    for (int i = 0; i < draws; ++i) {
      const double h2 = std::pow(uniform(0.0, 120.0), 2);
      const DiffFn p1 = sqdist(vec2(200), h2), p2 = sqdist(vec2(200), h2);
      const Eigen::VectorXd x1 = vec2(250), x2 = vec2(250), m1 = vec2(250), m2 = vec2(250);
      const auto bound = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return upper ? biconvex_upper(p1, p2, a, b, m1, m2) : biconvex_lower(p1, p2, a, b, m1, m2);
      };
      const double exact = p1(x1).value * p2(x2).value;
      const double b = bound(x1, x2);
      if (upper ? !below(exact, b) : !below(b, exact)) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(bound(m1, m2), p1(m1).value * p2(m2).value));
      Eigen::VectorXd z(4);
      z << m1, m2;
      const auto joint = [&](const Eigen::VectorXd& y) {
        return bound(Eigen::VectorXd(y.head<2>()), Eigen::VectorXd(y.tail<2>()));
      };
      Eigen::VectorXd exact_grad(4);
      exact_grad << p2(m2).value * p1(m1).grad, p1(m1).value * p2(m2).grad;
      rep.max_grad_err = std::max(rep.max_grad_err, grad_error(exact_grad, central_difference(joint, z)));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  {
    BoundReport rep{"secrecy_dc_surrogate"};
    for (int i = 0; i < draws; ++i) {
      const double c = log_uniform(1e-2, 1e2);
      const double q = log_uniform(1e-2, 1e2), r = log_uniform(1e-2, 1e2);
      const double qz = log_uniform(1e-2, 1e2), rz = log_uniform(1e-2, 1e2);
      const auto exact = [c](double qq, double rr) { return std::log2(1 + c / qq) - std::log2(1 + c / rr); };
      const auto sur = secrecy_dc_surrogate(q, r, qz, rz, c);
      if (!below(sur.value, exact(q, r))) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(secrecy_dc_surrogate(qz, rz, qz, rz, c).value, exact(qz, rz)));
      const auto f = [&](const Eigen::VectorXd& y) { return secrecy_dc_surrogate(y[0], y[1], qz, rz, c).value; };
      rep.max_grad_err =
          std::max(rep.max_grad_err, grad_error(Eigen::VectorXd(sur.grad), central_difference(f, Eigen::Vector2d(q, r))));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  for (bool is_q : {true, false}) {
    BoundReport rep{is_q ? "fq_surrogate" : "fr_surrogate"};
    for (int i = 0; i < draws; ++i) {
      const double H = uniform(30.0, 150.0);
      const Eigen::Vector2d user = vec2(200), other = vec2(200), pz = vec2(250);
      const Eigen::Vector2d p = pz + disc(10.0);
      const auto exact = [&](const Eigen::Vector2d& x) {
        return ((x - other).squaredNorm() + H * H) * ((x - user).squaredNorm() + H * H);
      };
      const auto eval = [&](const Eigen::Vector2d& x) {
        return is_q ? fq_surrogate(x, pz, user, other, H) : fr_surrogate(x, pz, user, other, H);
      };
      const auto sur = eval(p);
      if (is_q ? !below(exact(p), sur.value) : !below(sur.value, exact(p))) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(eval(pz).value, exact(pz)));
      const auto f = [&](const Eigen::VectorXd& y) { return eval(Eigen::Vector2d(y)).value; };
      rep.max_grad_err =
          std::max(rep.max_grad_err, grad_error(Eigen::VectorXd(sur.grad), central_difference(f, Eigen::VectorXd(p))));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  {
    BoundReport rep{"eve_rate_linearized"};
    for (int i = 0; i < draws; ++i) {
      const double sigma2 = 1e-15, gain_sq = sigma2 * log_uniform(1e-3, 1e4);
      const double p = uniform(0.0, 10.0), pz = i % 10 == 0 ? 0.0 : uniform(0.0, 10.0);
      const auto exact = [&](double x) { return std::log2(1 + x * gain_sq / sigma2); };
      const auto sur = eve_rate_linearized(p, pz, gain_sq, sigma2);
      if (!below(exact(p), sur.value)) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(eve_rate_linearized(pz, pz, gain_sq, sigma2).value, exact(pz)));
      const auto f = [&](const Eigen::VectorXd& y) { return eve_rate_linearized(y[0], pz, gain_sq, sigma2).value; };
      Eigen::VectorXd x(1);
      x << p;
      rep.max_grad_err = std::max(rep.max_grad_err, grad_error(Eigen::VectorXd(sur.grad), central_difference(f, x)));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  {
    BoundReport rep{"propulsion_upper"};
    const double k1 = 0.0822, k2 = 111.57, g = 9.8;
    for (int i = 0; i < draws; ++i) {
      const Eigen::Vector2d v = disc(20.0);
      const double speed = std::max(v.norm(), 0.2);
      const Eigen::Vector2d vv = v.norm() > 0 ? Eigen::Vector2d(v * speed / v.norm()) : Eigen::Vector2d(speed, 0);
      const double nu = uniform(0.1, speed);
      const Eigen::Vector2d a = disc(5.0), az = disc(5.0);
      const double nuz = uniform(0.1, 20.0);
      const double slacked = k1 * std::pow(vv.norm(), 3) + k2 / nu * (1 + a.squaredNorm() / (g * g));
      const double true_energy = k1 * std::pow(vv.norm(), 3) + k2 / vv.norm() * (1 + a.squaredNorm() / (g * g));
      const auto sur = propulsion_upper(vv, a, nu, az, nuz, k1, k2, g);
      if (!below(slacked, sur.value) || !below(true_energy, slacked)) ++rep.violations;
      const double at_z = propulsion_upper(vv, az, nuz, az, nuz, k1, k2, g).value;
      const double slacked_z = k1 * std::pow(vv.norm(), 3) + k2 / nuz * (1 + az.squaredNorm() / (g * g));
      rep.max_tight_err = std::max(rep.max_tight_err, rel(at_z, slacked_z));
      Eigen::VectorXd x(5);
      x << vv, a, nu;
      const auto f = [&](const Eigen::VectorXd& y) {
        return propulsion_upper(y.head<2>(), y.segment<2>(2), y[4], az, nuz, k1, k2, g).value;
      };
      rep.max_grad_err = std::max(rep.max_grad_err, grad_error(Eigen::VectorXd(sur.grad), central_difference(f, x)));
      ++rep.draws;
    }
    out.push_back(rep);
  }

  {
    BoundReport rep{"speed_sq_lower"};
    for (int i = 0; i < draws; ++i) {
      const Eigen::Vector2d v = disc(20.0), vz = i % 10 == 0 ? Eigen::Vector2d::Zero() : Eigen::Vector2d(disc(20.0));
      const auto sur = speed_sq_lower(v, vz);
      if (!below(sur.value, v.squaredNorm())) ++rep.violations;
      rep.max_tight_err = std::max(rep.max_tight_err, rel(speed_sq_lower(vz, vz).value, vz.squaredNorm()));
      const auto f = [&](const Eigen::VectorXd& y) { return speed_sq_lower(Eigen::Vector2d(y), vz).value; };
      const double err = grad_error(Eigen::VectorXd(sur.grad), central_difference(f, Eigen::VectorXd(v)));
      if (sur.grad.norm() > 0) rep.max_grad_err = std::max(rep.max_grad_err, err);
      ++rep.draws;
    }
    out.push_back(rep);
  }
  return out;
}

struct CoherenceReport {
  long geometries = 0;
  double max_closed_form_err = 0.0;  // | |g| − g0 L/(d1 d2) | / (g0 L/(d1 d2))
  long beaten_by_random = 0;         // random phase vectors exceeding the closed form
};

/// Closed-form phases against g0 L/(d1 d2) and against random phase vectors.
inline CoherenceReport run_coherence_suite(int geometries, int random_phases, unsigned seed = 99u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(-300.0, 300.0), ang(0.0, 2 * std::numbers::pi), alt(20.0, 200.0);
  std::uniform_int_distribution<int> elems(1, 64);
  CoherenceReport rep;
  for (int i = 0; i < geometries; ++i) {
    LinkParams p;
    p.altitude = alt(rng);
    p.num_elements = elems(rng);
    p.spacing_ratio = i % 2 ? 0.5 : 0.25 + 0.5 * ang(rng) / (2 * std::numbers::pi);
    p.ref_gain = std::pow(10.0, -3.5);
    const Eigen::Vector2d uav(xy(rng), xy(rng));
    const Eigen::Vector3d user(xy(rng), xy(rng), 0.0), ap(xy(rng), xy(rng), 0.0);
    const auto th = optimal_phases(uav, user, ap, p.num_elements, p.spacing_ratio, p.altitude, ang(rng));
    const double best = std::abs(effective_channel(uav, th, user, ap, p));
    const double d1 = geometry(uav, user, p.altitude).distance, d2 = geometry(uav, ap, p.altitude).distance;
    const double expect = p.ref_gain * p.num_elements / (d1 * d2);
    rep.max_closed_form_err = std::max(rep.max_closed_form_err, std::abs(best - expect) / expect);
    // Random trials reuse the per-element cascade conj(h_out) h_in of this geometry.
    const Eigen::VectorXcd cascade =
        channel_vector(geometry(uav, ap, p.altitude), p.num_elements, p.spacing_ratio, p.ref_gain,
                       LinkDirection::from_irs)
            .conjugate()
            .cwiseProduct(channel_vector(geometry(uav, user, p.altitude), p.num_elements, p.spacing_ratio,
                                         p.ref_gain, LinkDirection::to_irs));
    for (int k = 0; k < random_phases; ++k) {
      std::complex<double> g{0.0, 0.0};
      for (int l = 0; l < p.num_elements; ++l) g += cascade[l] * std::polar(1.0, ang(rng));
      if (std::abs(g) > best * (1 + 1e-12)) ++rep.beaten_by_random;
    }
    ++rep.geometries;
  }
  return rep;
}

}  // namespace uavirs::testing
