#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbpact {

/// Stationarity problem: find u with gradient(u) = 0. These are saddle
/// points (doubled actions carry a minus-sign branch), not minima.
struct StationarityProblem {
  int dimension = 0;
  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  /// Optional analytic Jacobian of the gradient; finite differences otherwise.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  Eigen::VectorXd initial_guess;
  double grad_tolerance = 1e-12;
  int max_iterations = 200;
};

struct SolverReport {
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> residual_history;
  int fallback_steps = 0;
  std::string failure;  // empty on success
};

/// Column-wise central-difference Jacobian of the gradient, step 1e-6 (1 + |x_j|).
inline Eigen::MatrixXd fd_jacobian(const StationarityProblem& p, const Eigen::VectorXd& x) {
  const int n = p.dimension;
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x(j)));
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    jac.col(j) = (p.gradient(xp) - p.gradient(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return jac;
}

/// Max over coordinates of |analytic - central finite difference| of the objective.
inline double check_gradient(const StationarityProblem& p, const Eigen::VectorXd& point) {
  if (point.size() != p.dimension) throw std::invalid_argument("check_gradient: dimension mismatch");
  const Eigen::VectorXd ga = p.gradient(point);
  if (!ga.allFinite()) throw std::runtime_error("check_gradient: non-finite gradient");
  double worst = 0.0;
  Eigen::VectorXd x = point;
  for (int j = 0; j < p.dimension; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(point(j)));
    x(j) = point(j) + h;
    const double fp = p.objective(x);
    x(j) = point(j) - h;
    const double fm = p.objective(x);
    x(j) = point(j);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("check_gradient: non-finite objective");
    worst = std::max(worst, std::abs(ga(j) - (fp - fm) / (2.0 * h)));
  }
  return worst;
}

/// Globally implicit Newton iteration on the gradient with backtracking on
/// the merit 1/2 ||gradient||^2. When the Newton direction is unusable
/// (near-singular Jacobian, flat saddle directions), falls back to damped
/// merit-normal steps (J^2 + nu I) y = -J g, which are always merit-descent
/// directions. Fully deterministic.
inline std::pair<Eigen::VectorXd, SolverReport> solve_stationary(const StationarityProblem& p) {
  if (p.dimension <= 0) throw std::invalid_argument("solve_stationary: dimension must be positive");
  if (!p.gradient) throw std::invalid_argument("solve_stationary: gradient callable required");
  if (p.initial_guess.size() != p.dimension)
    throw std::invalid_argument("solve_stationary: initial guess dimension mismatch");

  Eigen::VectorXd u = p.initial_guess;
  SolverReport rep;

  Eigen::VectorXd g = p.gradient(u);
  if (!g.allFinite()) {
    rep.failure = "non_finite_gradient";
    return {u, rep};
  }

  for (int it = 0; it < p.max_iterations; ++it) {
    const double gn = g.lpNorm<Eigen::Infinity>();
    rep.residual_history.push_back(gn);
    rep.iterations = it;
    rep.final_grad_norm = gn;
    if (gn <= p.grad_tolerance) {
      rep.converged = true;
      return {u, rep};
    }

    Eigen::MatrixXd jac = p.jacobian ? p.jacobian(u) : fd_jacobian(p, u);
    if (!jac.allFinite()) {
      rep.failure = "non_finite_jacobian";
      return {u, rep};
    }
    jac = 0.5 * (jac + jac.transpose().eval());  // Jacobian of a gradient is a Hessian

    // symmetric Jacobi equilibration
    const int n = p.dimension;
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i)
      d(i) = std::sqrt(std::max(jac.row(i).cwiseAbs().maxCoeff(), 1e-300));
    Eigen::MatrixXd js = d.cwiseInverse().asDiagonal() * jac * d.cwiseInverse().asDiagonal();
    Eigen::VectorXd gs = g.cwiseQuotient(d);

    const double m0 = 0.5 * g.squaredNorm();

    // backtracking with an Armijo test on the merit
    auto backtrack = [&](const Eigen::VectorXd& du, Eigen::VectorXd& u_out,
                         Eigen::VectorXd& g_out, double& m_out, double& alpha_out) -> bool {
      const double dd = g.dot(jac * du);
      if (!(dd < 0.0)) return false;
      double alpha = 1.0;
      while (alpha >= 1e-12) {
        Eigen::VectorXd un = u + alpha * du;
        Eigen::VectorXd gneu = p.gradient(un);
        if (gneu.allFinite()) {
          const double m2 = 0.5 * gneu.squaredNorm();
          if (m2 <= m0 + 1e-4 * alpha * dd) {
            u_out = std::move(un);
            g_out = std::move(gneu);
            m_out = m2;
            alpha_out = alpha;
            return true;
          }
        }
        alpha *= 0.5;
      }
      return false;
    };

    Eigen::VectorXd u_best, g_best;
    double m_best = std::numeric_limits<double>::infinity();
    bool have_step = false;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(js);
    const double rcond = lu.rcond();
    {
      Eigen::VectorXd du = lu.solve(-gs).cwiseQuotient(d);
      const double solve_res = (js * (du.cwiseProduct(d)) + gs).lpNorm<Eigen::Infinity>();
      if (solve_res <= 1e-6 * std::max(gs.lpNorm<Eigen::Infinity>(), 1e-300)) {
        Eigen::VectorXd un, gneu;
        double m2, alpha;
        if (backtrack(du, un, gneu, m2, alpha)) {
          // require useful progress from the Newton direction
          if (alpha >= 1e-2 && m2 < 0.999 * m0) {
            u = std::move(un);
            g = std::move(gneu);
            continue;
          }
          u_best = un;
          g_best = gneu;
          m_best = m2;
          have_step = true;
        }
      }
    }

    // damped merit-normal ladder
    ++rep.fallback_steps;
    const Eigen::MatrixXd b = js * js;
    const Eigen::VectorXd jg = js * gs;
    double nu = 1e-12;
    for (int attempt = 0; attempt < 16; ++attempt, nu *= 100.0) {
      Eigen::MatrixXd bn = b;
      bn.diagonal().array() += nu;
      Eigen::LLT<Eigen::MatrixXd> llt(bn);
      if (llt.info() != Eigen::Success) continue;
      Eigen::VectorXd du = llt.solve(-jg).cwiseQuotient(d);
      Eigen::VectorXd un, gneu;
      double m2, alpha;
      if (backtrack(du, un, gneu, m2, alpha) && m2 < m_best) {
        u_best = std::move(un);
        g_best = std::move(gneu);
        m_best = m2;
        have_step = true;
        if (m2 < 0.5 * m0) break;
      }
    }

    if (!have_step || !(m_best < m0)) {
      rep.failure = "singular_jacobian (rcond=" + std::to_string(rcond) + ")";
      return {u, rep};
    }
    u = std::move(u_best);
    g = std::move(g_best);
  }

  rep.iterations = p.max_iterations;
  const double gn = g.lpNorm<Eigen::Infinity>();
  rep.residual_history.push_back(gn);
  rep.final_grad_norm = gn;
  rep.converged = gn <= p.grad_tolerance;
  if (!rep.converged) rep.failure = "max_iterations";
  return {u, rep};
}

}  // namespace sbpact
