#include <cmath>
#include <random>

#include "doctest.h"
#include "uavirs/convex_solver.hpp"

using namespace uavirs;

namespace {

LocalTerm square(int i, double scale = 1.0) {
  return {{i}, [scale](const double* x, double& v, double* g, double* h) {
            v = scale * x[0] * x[0];
            g[0] = 2 * scale * x[0];
            h[0] = 2 * scale;
            return true;
          }};
}

// −log2(1 + c x), convex, domain 1 + c x > 0.
LocalTerm neg_log_rate(int i, double c) {
  return {{i}, [c](const double* x, double& v, double* g, double* h) {
            const double a = 1 + c * x[0];
            if (!(a > 0)) return false;
            v = -std::log2(a);
            g[0] = -c / (a * std::log(2.0));
            h[0] = c * c / (a * a * std::log(2.0));
            return true;
          }};
}

}  // namespace

TEST_CASE("active lower bound") {
  ConvexProgram p(1);
  p.objective.terms.push_back(square(0));
  SmoothFunction g;  // 1 − x ≤ 0
  g.constant = 1.0;
  g.linear.emplace_back(0, -1.0);
  p.add_inequality(g);
  auto r = solve(p, Eigen::VectorXd::Constant(1, 3.0));
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.stationarity < 1e-6);
}

TEST_CASE("single-slot power inversion") {
  const double c = 37.0, s = 3.0;
  ConvexProgram p(1);
  p.lower[0] = 0.0;
  p.objective.linear.emplace_back(0, 1.0);
  SmoothFunction g;  // s − log2(1 + c π) ≤ 0
  g.constant = s;
  g.terms.push_back(neg_log_rate(0, c));
  p.add_inequality(g);
  auto r = solve(p, Eigen::VectorXd::Constant(1, 10.0));
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.x[0] == doctest::Approx((std::pow(2.0, s) - 1) / c).epsilon(1e-6));
}

TEST_CASE("equality-constrained least norm") {
  ConvexProgram p(2);
  p.lower.setZero();
  p.objective.terms.push_back(square(0));
  p.objective.terms.push_back(square(1, 2.0));
  p.eq_matrix.resize(1, 2);
  p.eq_matrix.insert(0, 0) = 1.0;
  p.eq_matrix.insert(0, 1) = 1.0;
  p.eq_rhs = Eigen::VectorXd::Constant(1, 1.0);
  Eigen::VectorXd x0(2);
  x0 << 0.9, 0.1;
  auto r = solve(p, x0);
  CHECK(r.status == SolveStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(std::abs(r.x.sum() - 1.0) < 1e-10);
}

TEST_CASE("wide linear constraint uses the low-rank path") {
  const int n = 200;
  ConvexProgram p(n);
  SmoothFunction g;  // 10 − Σ x ≤ 0
  g.constant = 10.0;
  for (int i = 0; i < n; ++i) {
    p.objective.terms.push_back(square(i));
    g.linear.emplace_back(i, -1.0);
  }
  p.add_inequality(g);
  auto r = solve(p, Eigen::VectorXd::Constant(n, 1.0));
  CHECK(r.status == SolveStatus::optimal);
  for (int i = 0; i < n; ++i) CHECK(r.x[i] == doctest::Approx(0.05).epsilon(1e-5));
}

TEST_CASE("chained equalities with a wide constraint from an off-manifold start") {
  // min Σ x² s.t. Σ x ≥ 10, x_{i+1} − x_i = 0.01; optimum x_i = c + 0.01 i.
  const int n = 200;
  ConvexProgram p(n);
  SmoothFunction g;
  g.constant = 10.0;
  std::vector<Eigen::Triplet<double>> a;
  for (int i = 0; i < n; ++i) {
    p.objective.terms.push_back(square(i));
    g.linear.emplace_back(i, -1.0);
    if (i + 1 < n) a.emplace_back(i, i + 1, 1.0), a.emplace_back(i, i, -1.0);
  }
  p.add_inequality(g);
  p.eq_matrix.resize(n - 1, n);
  p.eq_matrix.setFromTriplets(a.begin(), a.end());
  p.eq_rhs = Eigen::VectorXd::Constant(n - 1, 0.01);
  auto r = solve(p, Eigen::VectorXd::Constant(n, 1.0));
  CHECK(r.status == SolveStatus::optimal);
  const double c = (10.0 - 0.01 * n * (n - 1) / 2.0) / n;
  for (int i = 0; i < n; ++i) CHECK(r.x[i] == doctest::Approx(c + 0.01 * i).epsilon(1e-6));
  CHECK((p.eq_matrix * r.x - p.eq_rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("optimum never worse than random feasible points; monotone stages; determinism") {
  // min Σ (x_i − a_i)² s.t. Σ x_i ≤ 1, x ≥ 0.
  const int n = 5;
  const double a[n] = {0.9, 0.4, -0.3, 0.7, 0.2};
  ConvexProgram p(n);
  p.lower.setZero();
  SmoothFunction g;
  g.constant = -1.0;
  for (int i = 0; i < n; ++i) {
    const double ai = a[i];
    p.objective.terms.push_back({{i}, [ai](const double* x, double& v, double* gr, double* h) {
                                   v = (x[0] - ai) * (x[0] - ai);
                                   gr[0] = 2 * (x[0] - ai);
                                   h[0] = 2;
                                   return true;
                                 }});
    g.linear.emplace_back(i, 1.0);
  }
  p.add_inequality(g);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(n, 0.1);
  auto r1 = solve(p, x0);
  auto r2 = solve(p, x0);
  REQUIRE(r1.status == SolveStatus::optimal);
  CHECK((r1.x.array() == r2.x.array()).all());
  for (std::size_t i = 1; i < r1.stage_objectives.size(); ++i)
    CHECK(r1.stage_objectives[i] <= r1.stage_objectives[i - 1] + 1e-9);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    x /= std::max(1.0, x.sum());
    double f = 0.0;
    p.objective.value(x, f);
    CHECK(r1.objective <= f + 1e-9);
  }
}

TEST_CASE("find_feasible") {
  SUBCASE("box only gives the center") {
    ConvexProgram p(2);
    p.lower << -1.0, 2.0;
    p.upper << 3.0, 4.0;
    auto f = find_feasible(p, Eigen::VectorXd::Zero(2));
    CHECK(f.feasible);
    CHECK(f.x[0] == doctest::Approx(1.0));
    CHECK(f.x[1] == doctest::Approx(3.0));
  }
  SUBCASE("strictly feasible point found") {
    ConvexProgram p(2);
    SmoothFunction g;  // x0² + x1² − 1 ≤ 0
    g.constant = -1.0;
    g.terms.push_back(square(0));
    g.terms.push_back(square(1));
    p.add_inequality(g);
    SmoothFunction h;  // 0.5 − x0 ≤ 0
    h.constant = 0.5;
    h.linear.emplace_back(0, -1.0);
    p.add_inequality(h);
    Eigen::VectorXd x0(2);
    x0 << -3.0, 2.0;
    auto f = find_feasible(p, x0);
    CHECK(f.feasible);
    CHECK(max_constraint_value(p, f.x) < 0.0);
  }
  SUBCASE("throughput demand above capacity ceiling is infeasible") {
    // Σ_n log2(1 + c π_n) ≥ s with π_n ≤ P: capacity N log2(1 + c P).
    const int n = 3;
    const double c = 5.0, P = 10.0;
    const double ceiling = n * std::log2(1 + c * P);
    ConvexProgram p(n);
    p.lower.setZero();
    p.upper.setConstant(P);
    SmoothFunction g;
    g.constant = ceiling * 1.01;
    for (int i = 0; i < n; ++i) g.terms.push_back(neg_log_rate(i, c));
    p.add_inequality(g);
    auto f = find_feasible(p, Eigen::VectorXd::Constant(n, 1.0));
    CHECK_FALSE(f.feasible);
    g.constant = ceiling * 0.99;
    p.inequalities[0] = g;
    CHECK(find_feasible(p, Eigen::VectorXd::Constant(n, 1.0)).feasible);
  }
}
