#include "uavirs/convex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace uavirs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kWideSupport = 48;      // dense ∇g∇gᵀ above this goes to the low-rank part
constexpr double kArmijo = 1e-4;
constexpr double kBoundaryFraction = 0.99;
constexpr double kNewtonEps = 1e-16;  // ½λ² stopping threshold
constexpr double kDualReg = 1e-9;     // −δI block of the equality KKT matrix
constexpr int kRefineSteps = 12;

using Triplet = Eigen::Triplet<double>;

// A SmoothFunction with its support resolved to local positions.
struct Compiled {
  const SmoothFunction* fn = nullptr;
  std::vector<int> support;
  std::vector<std::pair<int, double>> linear;  // (local position, coefficient)
  std::vector<std::vector<int>> local;          // per term
  std::size_t hess_size = 0;                    // Σ |term|²
  bool wide = false;
};

Compiled compile(const SmoothFunction& f) {
  Compiled c;
  c.fn = &f;
  c.support = f.support();
  auto pos = [&](int g) {
    return static_cast<int>(std::lower_bound(c.support.begin(), c.support.end(), g) - c.support.begin());
  };
  for (const auto& [i, a] : f.linear) c.linear.emplace_back(pos(i), a);
  for (const auto& t : f.terms) {
    std::vector<int> loc(t.index.size());
    for (std::size_t i = 0; i < t.index.size(); ++i) loc[i] = pos(t.index[i]);
    c.hess_size += t.index.size() * t.index.size();
    c.local.push_back(std::move(loc));
  }
  c.wide = static_cast<int>(c.support.size()) > kWideSupport;
  return c;
}

struct Scratch {
  std::vector<double> xs, g, h;
};

// Value, local gradient and stacked term Hessians. Returns false out of domain.
bool evaluate(const Compiled& c, const Eigen::VectorXd& x, double& value, Eigen::VectorXd* grad,
              std::vector<double>* hess, Scratch& s) {
  const SmoothFunction& f = *c.fn;
  value = f.constant;
  if (grad) grad->setZero(static_cast<Eigen::Index>(c.support.size()));
  if (hess) hess->resize(c.hess_size);
  for (const auto& [i, a] : f.linear) value += a * x[i];
  if (grad)
    for (const auto& [p, a] : c.linear) (*grad)[p] += a;
  std::size_t hoff = 0;
  for (std::size_t t = 0; t < f.terms.size(); ++t) {
    const auto& term = f.terms[t];
    const std::size_t m = term.index.size();
    s.xs.resize(m);
    s.g.assign(m, 0.0);
    s.h.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) s.xs[i] = x[term.index[i]];
    double v = 0.0;
    if (!term.eval(s.xs.data(), v, s.g.data(), s.h.data()) || !std::isfinite(v)) return false;
    value += v;
    if (grad)
      for (std::size_t i = 0; i < m; ++i) (*grad)[c.local[t][i]] += s.g[i];
    if (hess) std::copy(s.h.begin(), s.h.end(), hess->begin() + static_cast<std::ptrdiff_t>(hoff));
    hoff += m * m;
  }
  return std::isfinite(value);
}

// One barrier subproblem evaluator: F(x) = t f0(x) − Σ log(−g_i) − Σ log(box slack).
class Barrier {
 public:
  Barrier(const ConvexProgram& p) : prog_(p), n_(p.num_vars) {
    obj_ = compile(p.objective);
    for (const auto& g : p.inequalities) cons_.push_back(compile(g));
    fixed_.assign(n_, false);
    for (int i = 0; i < n_; ++i) {
      fixed_[i] = p.lower[i] == p.upper[i];
      if (fixed_[i]) continue;
      if (std::isfinite(p.lower[i])) ++m_;
      if (std::isfinite(p.upper[i])) ++m_;
    }
    m_ += static_cast<int>(cons_.size());
    for (const auto& c : cons_)
      if (c.wide) ++num_wide_;
    p_eq_ = static_cast<int>(p.eq_matrix.rows());
    a_free_ = p.eq_matrix;
    for (int k = 0; k < a_free_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_free_, k); it; ++it)
        if (fixed_[it.col()]) it.valueRef() = 0.0;
    a_free_.prune(0.0);
  }

  int num_barrier_terms() const { return m_; }
  bool has_equalities() const { return p_eq_ > 0; }

  double objective(const Eigen::VectorXd& x) {
    double v = 0.0;
    return evaluate(obj_, x, v, nullptr, nullptr, scratch_) ? v : kInf;
  }

  double objective_grad_norm(const Eigen::VectorXd& x) {
    double v = 0.0;
    Eigen::VectorXd g;
    if (!evaluate(obj_, x, v, &g, nullptr, scratch_)) return 0.0;
    return g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  }

  // F(x) or +inf when outside the domain.
  double value(const Eigen::VectorXd& x, double t) {
    double f0 = 0.0;
    if (!evaluate(obj_, x, f0, nullptr, nullptr, scratch_)) return kInf;
    double F = t * f0;
    for (const auto& c : cons_) {
      double g = 0.0;
      if (!evaluate(c, x, g, nullptr, nullptr, scratch_) || !(g < 0.0)) return kInf;
      F -= std::log(-g);
    }
    for (int i = 0; i < n_; ++i) {
      if (fixed_[i]) continue;
      if (std::isfinite(prog_.lower[i])) {
        const double s = x[i] - prog_.lower[i];
        if (!(s > 0)) return kInf;
        F -= std::log(s);
      }
      if (std::isfinite(prog_.upper[i])) {
        const double s = prog_.upper[i] - x[i];
        if (!(s > 0)) return kInf;
        F -= std::log(s);
      }
    }
    return F;
  }

  // Newton direction at x. Returns false on evaluation or factorization failure.
  bool newton(const Eigen::VectorXd& x, double t, Eigen::VectorXd& grad, Eigen::VectorXd& dir,
              Eigen::VectorXd& eq_dual) {
    triplets_.clear();
    grad.setZero(n_);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n_, num_wide_);
    int wide_col = 0;

    auto add_fn = [&](const Compiled& c, double gscale, double hscale, bool outer, double oscale,
                      const Eigen::VectorXd& gl, const std::vector<double>& hs) {
      for (std::size_t i = 0; i < c.support.size(); ++i) grad[c.support[i]] += gscale * gl[i];
      std::size_t off = 0;
      for (std::size_t t = 0; t < c.fn->terms.size(); ++t) {
        const auto& idx = c.fn->terms[t].index;
        const std::size_t m = idx.size();
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b < m; ++b) push(idx[a], idx[b], hscale * hs[off + a * m + b]);
        off += m * m;
      }
      if (outer) {
        for (std::size_t a = 0; a < c.support.size(); ++a)
          for (std::size_t b = 0; b < c.support.size(); ++b)
            push(c.support[a], c.support[b], oscale * gl[a] * gl[b]);
      }
    };

    double v = 0.0;
    if (!evaluate(obj_, x, v, &gl_, &hs_, scratch_)) return false;
    add_fn(obj_, t, t, false, 0.0, gl_, hs_);
    for (const auto& c : cons_) {
      if (!evaluate(c, x, v, &gl_, &hs_, scratch_) || !(v < 0.0)) return false;
      const double s = -v;
      add_fn(c, 1.0 / s, 1.0 / s, !c.wide, 1.0 / (s * s), gl_, hs_);
      if (c.wide) {
        for (std::size_t i = 0; i < c.support.size(); ++i)
          if (!fixed_[c.support[i]]) U(c.support[i], wide_col) = gl_[i] / s;
        ++wide_col;
      }
    }
    diag_.setZero(n_);
    for (int i = 0; i < n_; ++i) {
      if (fixed_[i]) continue;
      if (std::isfinite(prog_.lower[i])) {
        const double s = x[i] - prog_.lower[i];
        grad[i] -= 1.0 / s;
        diag_[i] += 1.0 / (s * s);
      }
      if (std::isfinite(prog_.upper[i])) {
        const double s = prog_.upper[i] - x[i];
        grad[i] += 1.0 / s;
        diag_[i] += 1.0 / (s * s);
      }
    }
    for (int i = 0; i < n_; ++i)
      if (fixed_[i]) grad[i] = 0.0;

    for (double reg : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
      if (solve_system(x, grad, U, reg, dir, eq_dual)) return true;
    }
    return false;
  }

 private:
  void push(int r, int c, double v) {
    if (fixed_[r] || fixed_[c]) return;
    triplets_.emplace_back(r, c, v);
  }

  // H d + Aᵀy = −g, A d = b − A x with H = S + U Uᵀ, S sparse SPD. The low-rank
  // part goes through Woodbury. Equalities use the sparse quasi-definite KKT
  // matrix [S Aᵀ; A −δI] with refinement against δ = 0; when refinement stalls
  // they fall back to the dense Schur complement A H⁻¹ Aᵀ.
  bool solve_system(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, const Eigen::MatrixXd& U, double reg,
                    Eigen::VectorXd& dir, Eigen::VectorXd& eq_dual) {
    std::vector<Triplet> all = triplets_;
    for (int i = 0; i < n_; ++i) all.emplace_back(i, i, fixed_[i] ? 1.0 : diag_[i] + reg);
    Eigen::SparseMatrix<double> S(n_, n_);
    S.setFromTriplets(all.begin(), all.end());
    const Eigen::VectorXd r = p_eq_ > 0 ? Eigen::VectorXd(prog_.eq_rhs - prog_.eq_matrix * x) : Eigen::VectorXd();
    if (p_eq_ > 0 && solve_kkt(S, all, grad, U, r, dir, eq_dual)) return finish(dir);

    if (!ldlt_analyzed_) {
      ldlt_.analyzePattern(S);
      ldlt_analyzed_ = true;
    }
    ldlt_.factorize(S);
    if (ldlt_.info() != Eigen::Success) return false;
    if ((ldlt_.vectorD().array() <= 0).any()) return false;

    Eigen::MatrixXd Z;
    Eigen::LDLT<Eigen::MatrixXd> M;
    if (U.cols() > 0) {
      Z = ldlt_.solve(U);
      M.compute(Eigen::MatrixXd::Identity(U.cols(), U.cols()) + U.transpose() * Z);
    }
    auto h_inv = [&](const Eigen::MatrixXd& B) -> Eigen::MatrixXd {
      Eigen::MatrixXd Y = ldlt_.solve(B);
      if (U.cols() > 0) Y -= Z * M.solve(U.transpose() * Y);
      return Y;
    };

    dir = h_inv(-grad);
    if (p_eq_ > 0) {
      const Eigen::MatrixXd HinvAt = h_inv(Eigen::MatrixXd(a_free_.transpose()));
      const Eigen::MatrixXd schur = a_free_ * HinvAt;
      Eigen::LDLT<Eigen::MatrixXd> sc(schur);
      if (sc.info() != Eigen::Success) return false;
      // Steer back onto A x = b so round-off in the equalities never accumulates.
      eq_dual = sc.solve(a_free_ * dir - r);
      dir -= HinvAt * eq_dual;
    } else {
      eq_dual.resize(0);
    }
    return finish(dir);
  }

  bool finish(Eigen::VectorXd& dir) const {
    if (!dir.allFinite()) return false;
    for (int i = 0; i < n_; ++i)
      if (fixed_[i]) dir[i] = 0.0;
    return true;
  }

  bool solve_kkt(const Eigen::SparseMatrix<double>& S, std::vector<Triplet>& all, const Eigen::VectorXd& grad,
                 const Eigen::MatrixXd& U, const Eigen::VectorXd& r, Eigen::VectorXd& dir, Eigen::VectorXd& eq_dual) {
    const int dim = n_ + p_eq_;
    for (int k = 0; k < a_free_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_free_, k); it; ++it) {
        all.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        all.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
      }
    for (int i = 0; i < p_eq_; ++i) all.emplace_back(n_ + i, n_ + i, -kDualReg);
    Eigen::SparseMatrix<double> K(dim, dim);
    K.setFromTriplets(all.begin(), all.end());
    if (!kkt_analyzed_) {
      kkt_.analyzePattern(K);
      kkt_analyzed_ = true;
    }
    kkt_.factorize(K);
    if (kkt_.info() != Eigen::Success) return false;
    // Quasi-definite: exactly one negative pivot per equality.
    if ((kkt_.vectorD().array() < 0).count() != p_eq_ || (kkt_.vectorD().array() == 0).any()) return false;

    Eigen::MatrixXd Z;
    Eigen::PartialPivLU<Eigen::MatrixXd> M;
    if (U.cols() > 0) {
      Eigen::MatrixXd Ut = Eigen::MatrixXd::Zero(dim, U.cols());
      Ut.topRows(n_) = U;
      Z = kkt_.solve(Ut);
      M.compute(Eigen::MatrixXd::Identity(U.cols(), U.cols()) + U.transpose() * Z.topRows(n_));
    }
    auto solve_reg = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
      Eigen::VectorXd y = kkt_.solve(b);
      if (U.cols() > 0) y -= Z * M.solve(U.transpose() * y.head(n_));
      return y;
    };
    auto apply_exact = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
      Eigen::VectorXd out(dim);
      const Eigen::VectorXd d = z.head(n_), y = z.tail(p_eq_);
      out.head(n_) = S * d + a_free_.transpose() * y;
      if (U.cols() > 0) out.head(n_) += U * (U.transpose() * d);
      out.tail(p_eq_) = a_free_ * d;
      return out;
    };

    Eigen::VectorXd rhs(dim);
    rhs << -grad, r;
    Eigen::VectorXd z = solve_reg(rhs);
    // Round-off in S d is of order ε‖S‖‖d‖, which near the boundary dwarfs ‖g‖.
    const double s_max = S.coeffs().cwiseAbs().maxCoeff();
    const double a_max = a_free_.nonZeros() ? a_free_.coeffs().cwiseAbs().maxCoeff() : 0.0;
    for (int it = 0; it < kRefineSteps; ++it) {
      const Eigen::VectorXd res = rhs - apply_exact(z);
      if (!res.allFinite()) return false;
      const double d_norm = z.head(n_).lpNorm<Eigen::Infinity>();
      const double top_scale = grad.lpNorm<Eigen::Infinity>() + s_max * d_norm +
                               a_max * z.tail(p_eq_).lpNorm<Eigen::Infinity>();
      const double eq_scale = 1.0 + r.lpNorm<Eigen::Infinity>() + a_max * d_norm;
      if (res.head(n_).lpNorm<Eigen::Infinity>() <= 1e-11 * top_scale &&
          res.tail(p_eq_).lpNorm<Eigen::Infinity>() <= 1e-13 * eq_scale) {
        dir = z.head(n_);
        eq_dual = z.tail(p_eq_);
        return true;
      }
      z += solve_reg(res);
    }
    return false;
  }

  const ConvexProgram& prog_;
  int n_ = 0;
  int m_ = 0;
  int num_wide_ = 0;
  int p_eq_ = 0;
  Compiled obj_;
  std::vector<Compiled> cons_;
  std::vector<bool> fixed_;
  Scratch scratch_;
  Eigen::VectorXd gl_;
  std::vector<double> hs_;
  Eigen::VectorXd diag_;
  std::vector<Triplet> triplets_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> kkt_;
  Eigen::SparseMatrix<double> a_free_;  // equality matrix without fixed columns
  bool ldlt_analyzed_ = false;
  bool kkt_analyzed_ = false;
};

double box_step_limit(const ConvexProgram& p, const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
  double step = 1.0;
  for (int i = 0; i < p.num_vars; ++i) {
    if (d[i] < 0 && std::isfinite(p.lower[i])) step = std::min(step, kBoundaryFraction * (x[i] - p.lower[i]) / -d[i]);
    if (d[i] > 0 && std::isfinite(p.upper[i])) step = std::min(step, kBoundaryFraction * (p.upper[i] - x[i]) / d[i]);
  }
  return step;
}

using StopFn = std::function<bool(const Eigen::VectorXd&)>;

SolveResult barrier_solve(const ConvexProgram& program, const Eigen::VectorXd& start, const SolverOptions& opt,
                          const StopFn& stop) {
  SolveResult res;
  res.x = start;
  Barrier bar(program);
  const int m = std::max(1, bar.num_barrier_terms());
  const double f_start = bar.objective(start);
  double t = std::clamp(m / std::max(std::abs(f_start), 1.0), 1e-3, 1e8);

  Eigen::VectorXd& x = res.x;
  Eigen::VectorXd grad, dir, eq_dual;
  if (!std::isfinite(bar.value(x, t))) {
    res.status = SolveStatus::infeasible;
    res.max_violation = std::max(0.0, max_constraint_value(program, x));
    return res;
  }

  bool converged = false;
  for (int stage = 0; stage < opt.max_stages; ++stage) {
    bool stage_done = false;
    for (int it = 0; it < opt.max_newton; ++it) {
      if (!bar.newton(x, t, grad, dir, eq_dual)) break;
      ++res.newton_steps;
      const double slope = grad.dot(dir);
      const double F0 = bar.value(x, t);
      if (-slope / 2.0 <= kNewtonEps) {
        stage_done = true;
        break;
      }
      double step = box_step_limit(program, x, dir);
      Eigen::VectorXd trial;
      bool accepted = false;
      while (step > 1e-16) {
        trial = x + step * dir;
        const double F1 = bar.value(trial, t);
        if (F1 <= F0 + kArmijo * step * slope) {
          accepted = F1 < F0;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        // No progress possible at this precision; the stage is as good as it gets.
        stage_done = true;
        break;
      }
      x = trial;
      if (stop && stop(x)) {
        res.objective = bar.objective(x);
        res.stage_objectives.push_back(res.objective);
        res.status = SolveStatus::optimal;
        res.duality_gap = m / t;
        return res;
      }
    }
    res.stage_objectives.push_back(bar.objective(x));
    if (!stage_done) break;
    if (m / t < opt.tol) {
      converged = true;
      break;
    }
    t *= opt.mu;
  }

  res.objective = bar.objective(x);
  res.duality_gap = m / t;
  res.max_violation = std::max(0.0, max_constraint_value(program, x));
  if (bar.newton(x, t, grad, dir, eq_dual)) {
    Eigen::VectorXd r = grad;
    if (program.eq_matrix.rows() > 0) r += program.eq_matrix.transpose() * eq_dual;
    res.stationarity = r.lpNorm<Eigen::Infinity>() / t / (1.0 + bar.objective_grad_norm(x));
  }
  res.status = converged ? SolveStatus::optimal : SolveStatus::max_iter;
  return res;
}

}  // namespace

bool SmoothFunction::value(const Eigen::VectorXd& x, double& out) const {
  Compiled c = compile(*this);
  Scratch s;
  return evaluate(c, x, out, nullptr, nullptr, s);
}

std::vector<int> SmoothFunction::support() const {
  std::vector<int> s;
  for (const auto& [i, a] : linear) s.push_back(i);
  for (const auto& t : terms) s.insert(s.end(), t.index.begin(), t.index.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

ConvexProgram::ConvexProgram(int n)
    : num_vars(n),
      lower(Eigen::VectorXd::Constant(n, -kInf)),
      upper(Eigen::VectorXd::Constant(n, kInf)),
      eq_matrix(0, n) {}

int ConvexProgram::add_inequality(SmoothFunction g) {
  inequalities.push_back(std::move(g));
  return static_cast<int>(inequalities.size()) - 1;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

double max_constraint_value(const ConvexProgram& program, const Eigen::VectorXd& x) {
  double worst = -kInf;
  for (const auto& g : program.inequalities) {
    double v = 0.0;
    if (!g.value(x, v)) return kInf;
    worst = std::max(worst, v);
  }
  return worst;
}

SolveResult solve(const ConvexProgram& program, const Eigen::VectorXd& start, const SolverOptions& options) {
  return barrier_solve(program, start, options, {});
}

FeasibilityResult find_feasible(const ConvexProgram& program, const Eigen::VectorXd& start,
                                const SolverOptions& options) {
  const int n = program.num_vars;
  FeasibilityResult out;
  Eigen::VectorXd x = start;
  for (int i = 0; i < n; ++i) {
    const double lo = program.lower[i], hi = program.upper[i];
    if (lo == hi) {
      x[i] = lo;
      continue;
    }
    const double width = std::isfinite(hi - lo) ? hi - lo : kInf;
    const double pad = std::min(1e-3 * std::max(1.0, std::abs(std::isfinite(lo) ? lo : hi)), 0.25 * width);
    if (std::isfinite(lo) && x[i] < lo + pad) x[i] = lo + pad;
    if (std::isfinite(hi) && x[i] > hi - pad) x[i] = hi - pad;
  }
  const double margin = options.feasibility_margin;
  if (program.inequalities.empty() && program.eq_matrix.rows() == 0) {
    for (int i = 0; i < n; ++i)
      if (std::isfinite(program.lower[i]) && std::isfinite(program.upper[i]))
        x[i] = 0.5 * (program.lower[i] + program.upper[i]);
  }
  out.x = x;
  out.max_constraint = max_constraint_value(program, x);
  if (program.inequalities.empty() || out.max_constraint < -margin) {
    out.feasible = std::isfinite(out.max_constraint) || program.inequalities.empty();
    return out;
  }
  if (!std::isfinite(out.max_constraint)) return out;

  // Auxiliary program in (x, u).
  ConvexProgram aux(n + 1);
  aux.lower.head(n) = program.lower;
  aux.upper.head(n) = program.upper;
  aux.lower[n] = -1.0;
  aux.objective.linear.emplace_back(n, 1.0);
  for (const auto& g : program.inequalities) {
    SmoothFunction h = g;
    h.linear.emplace_back(n, -1.0);
    aux.inequalities.push_back(std::move(h));
  }
  if (program.eq_matrix.rows() > 0) {
    aux.eq_matrix.resize(program.eq_matrix.rows(), n + 1);
    std::vector<Triplet> tr;
    for (int k = 0; k < program.eq_matrix.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(program.eq_matrix, k); it; ++it)
        tr.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    aux.eq_matrix.setFromTriplets(tr.begin(), tr.end());
    aux.eq_rhs = program.eq_rhs;
  }
  Eigen::VectorXd z(n + 1);
  z.head(n) = x;
  // Just above the worst violation, so the barrier starts centred near x.
  z[n] = out.max_constraint + std::max(1e-3, std::abs(out.max_constraint));

  SolverOptions aux_opt = options;
  auto res = barrier_solve(aux, z, aux_opt, [&](const Eigen::VectorXd& zz) { return zz[n] < -margin; });
  out.newton_steps = res.newton_steps;
  out.x = res.x.head(n);
  out.max_constraint = max_constraint_value(program, out.x);
  out.feasible = out.max_constraint < -margin;
  return out;
}

}  // namespace uavirs
