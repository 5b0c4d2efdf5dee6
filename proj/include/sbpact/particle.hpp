#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sbpact/affine.hpp"
#include "sbpact/newton.hpp"
#include "sbpact/sbp.hpp"

namespace sbpact {

/// Point mass in a constant force field, S = integral of (1/2 m xdot^2 - m g x),
/// discretized as a doubled initial-value action.
struct ParticleConfig {
  double mass = 1.0;
  double g = 1.0;
  double x_init = 0.0;
  double v_init = 0.0;
  double t_init = 0.0;
  double t_final = 1.0;
  int n_t = 32;
  SbpOrder order = SbpOrder::d121;
  bool regularized = true;
  double grad_tolerance = 1e-12;
  int max_iterations = 200;

  void validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("ParticleConfig: mass must be positive");
    if (!(t_final > t_init)) throw std::invalid_argument("ParticleConfig: t_final <= t_init");
    if (n_t < 2) throw std::invalid_argument("ParticleConfig: n_t must be >= 2");
  }
  Grid1D grid() const { return make_grid(t_init, t_final, n_t); }
};

struct DoubledTrajectory {
  Eigen::VectorXd times;
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;
  Eigen::Vector4d lambdas;
  SolverReport report;
};

/// Closed-form trajectory x_i + v_i (t - t_i) - 1/2 g (t - t_i)^2.
inline double analytic_particle(const ParticleConfig& cfg, double t) {
  const double eps = 1e-12 * (1.0 + std::abs(cfg.t_final - cfg.t_init));
  if (t < cfg.t_init - eps || t > cfg.t_final + eps)
    throw std::invalid_argument("analytic_particle: t outside span");
  const double dt = t - cfg.t_init;
  return cfg.x_init + cfg.v_init * dt - 0.5 * cfg.g * dt * dt;
}

namespace detail {

struct ParticleOps {
  SbpPair pair;
  Eigen::MatrixXd a;      // derivative operator (affine homogeneous part or plain D)
  Eigen::VectorXd off;    // affine offset (zero when unregularized)
  Eigen::MatrixXd k;      // a^T H a
  Eigen::VectorXd ath_off;  // a^T H off
  Eigen::VectorXd a_row0, a_rowN;
  int n = 0;
};

inline ParticleOps particle_ops(const ParticleConfig& cfg) {
  ParticleOps ops;
  ops.pair = build_sbp(cfg.order, cfg.grid());
  ops.n = cfg.n_t;
  if (cfg.regularized) {
    AffineOperator ab = regularize(ops.pair, 0, cfg.x_init);
    ops.a = ab.homogeneous;
    ops.off = ab.offset;
  } else {
    ops.a = ops.pair.d;
    ops.off = Eigen::VectorXd::Zero(ops.n);
  }
  const Eigen::MatrixXd ha = ops.pair.h.asDiagonal() * ops.a;
  ops.k = ops.a.transpose() * ha;
  ops.ath_off = ops.a.transpose() * ops.pair.h.cwiseProduct(ops.off);
  ops.a_row0 = ops.a.row(0).transpose();
  ops.a_rowN = ops.a.row(ops.n - 1).transpose();
  return ops;
}

}  // namespace detail

/// Assemble the doubled action as a stationarity problem over
/// [x1(n), x2(n), lambda_1..lambda_4]. The action is quadratic, so both the
/// gradient and the (constant) Jacobian are analytic.
inline StationarityProblem assemble_particle_action(const ParticleConfig& cfg) {
  cfg.validate();
  auto ops = std::make_shared<detail::ParticleOps>(detail::particle_ops(cfg));
  const int n = cfg.n_t;
  const int dim = 2 * n + 4;
  const double m = cfg.mass;
  const double g = cfg.g;
  const double xi = cfg.x_init;
  const double vi = cfg.v_init;

  StationarityProblem p;
  p.dimension = dim;
  p.grad_tolerance = cfg.grad_tolerance;
  p.max_iterations = cfg.max_iterations;

  p.objective = [ops, n, m, g, xi, vi](const Eigen::VectorXd& u) {
    const auto x1 = u.segment(0, n);
    const auto x2 = u.segment(n, n);
    const Eigen::VectorXd v1 = ops->a * x1 + ops->off;
    const Eigen::VectorXd v2 = ops->a * x2 + ops->off;
    const auto& h = ops->pair.h;
    const double e1 = 0.5 * m * v1.dot(h.cwiseProduct(v1)) - m * g * h.dot(x1);
    const double e2 = 0.5 * m * v2.dot(h.cwiseProduct(v2)) - m * g * h.dot(x2);
    double val = e1 - e2;
    val += u(2 * n + 0) * (0.5 * (x1(0) + x2(0)) - xi);
    val += u(2 * n + 1) * (0.5 * (v1(0) + v2(0)) - vi);
    val += u(2 * n + 2) * (x1(n - 1) - x2(n - 1));
    val += u(2 * n + 3) * (v1(n - 1) - v2(n - 1));
    return val;
  };

  p.gradient = [ops, n, m, g, xi, vi](const Eigen::VectorXd& u) {
    const auto x1 = u.segment(0, n);
    const auto x2 = u.segment(n, n);
    const double l1 = u(2 * n + 0), l2 = u(2 * n + 1), l3 = u(2 * n + 2), l4 = u(2 * n + 3);
    const Eigen::VectorXd v1 = ops->a * x1 + ops->off;
    const Eigen::VectorXd v2 = ops->a * x2 + ops->off;
    const auto& h = ops->pair.h;
    Eigen::VectorXd grad(2 * n + 4);
    Eigen::VectorXd g1 = m * (ops->k * x1 + ops->ath_off) - m * g * h;
    Eigen::VectorXd g2 = -m * (ops->k * x2 + ops->ath_off) + m * g * h;
    g1(0) += 0.5 * l1;
    g2(0) += 0.5 * l1;
    g1 += 0.5 * l2 * ops->a_row0;
    g2 += 0.5 * l2 * ops->a_row0;
    g1(n - 1) += l3;
    g2(n - 1) -= l3;
    g1 += l4 * ops->a_rowN;
    g2 -= l4 * ops->a_rowN;
    grad.segment(0, n) = g1;
    grad.segment(n, n) = g2;
    grad(2 * n + 0) = 0.5 * (x1(0) + x2(0)) - xi;
    grad(2 * n + 1) = 0.5 * (v1(0) + v2(0)) - vi;
    grad(2 * n + 2) = x1(n - 1) - x2(n - 1);
    grad(2 * n + 3) = v1(n - 1) - v2(n - 1);
    return grad;
  };

  p.jacobian = [ops, n, m](const Eigen::VectorXd&) {
    const int dim = 2 * n + 4;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
    jac.block(0, 0, n, n) = m * ops->k;
    jac.block(n, n, n, n) = -m * ops->k;
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n), c2 = Eigen::VectorXd::Zero(n);
    c1(0) = 0.5;
    Eigen::VectorXd r0 = 0.5 * ops->a_row0;
    Eigen::VectorXd eN = Eigen::VectorXd::Zero(n);
    eN(n - 1) = 1.0;
    jac.block(0, 2 * n + 0, n, 1) = c1;
    jac.block(n, 2 * n + 0, n, 1) = c1;
    jac.block(0, 2 * n + 1, n, 1) = r0;
    jac.block(n, 2 * n + 1, n, 1) = r0;
    jac.block(0, 2 * n + 2, n, 1) = eN;
    jac.block(n, 2 * n + 2, n, 1) = -eN;
    jac.block(0, 2 * n + 3, n, 1) = ops->a_rowN;
    jac.block(n, 2 * n + 3, n, 1) = -ops->a_rowN;
    jac.block(2 * n + 0, 0, 1, n) = c1.transpose();
    jac.block(2 * n + 0, n, 1, n) = c1.transpose();
    jac.block(2 * n + 1, 0, 1, n) = r0.transpose();
    jac.block(2 * n + 1, n, 1, n) = r0.transpose();
    jac.block(2 * n + 2, 0, 1, n) = eN.transpose();
    jac.block(2 * n + 2, n, 1, n) = -eN.transpose();
    jac.block(2 * n + 3, 0, 1, n) = ops->a_rowN.transpose();
    jac.block(2 * n + 3, n, 1, n) = -ops->a_rowN.transpose();
    return jac;
  };

  // straight-line trajectory, zero multipliers
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(dim);
  const Grid1D grid = cfg.grid();
  for (int i = 0; i < n; ++i) {
    const double line = xi + vi * (grid.coord(i) - cfg.t_init);
    u0(i) = line;
    u0(n + i) = line;
  }
  p.initial_guess = u0;
  return p;
}

inline DoubledTrajectory solve_particle(const ParticleConfig& cfg) {
  StationarityProblem p = assemble_particle_action(cfg);
  auto [u, rep] = solve_stationary(p);
  const int n = cfg.n_t;
  DoubledTrajectory tr;
  tr.x1 = u.segment(0, n);
  tr.x2 = u.segment(n, n);
  tr.lambdas = u.segment(2 * n, 4);
  tr.report = std::move(rep);
  tr.times.resize(n);
  const Grid1D grid = cfg.grid();
  for (int i = 0; i < n; ++i) tr.times(i) = grid.coord(i);
  return tr;
}

struct ConvergenceStudy {
  double slope = 0.0;
  bool degenerate = false;  // errors at round-off level, no meaningful fit
  std::vector<int> grids;
  std::vector<double> max_errors;
};

/// Grid-refinement study: least-squares slope of log(max error) vs log(dt).
inline ConvergenceStudy convergence_study(const ParticleConfig& base,
                                          const std::vector<int>& grid_list) {
  if (grid_list.size() < 4)
    throw std::invalid_argument("convergence_study: need at least 4 grids");
  for (std::size_t i = 1; i < grid_list.size(); ++i)
    if (grid_list[i] <= grid_list[i - 1])
      throw std::invalid_argument("convergence_study: grids must be strictly increasing");

  ConvergenceStudy st;
  st.grids = grid_list;
  for (int n : grid_list) {
    ParticleConfig cfg = base;
    cfg.n_t = n;
    DoubledTrajectory tr = solve_particle(cfg);
    if (!tr.report.converged)
      throw std::runtime_error("convergence_study: solver failed at n_t=" + std::to_string(n) +
                               " (" + tr.report.failure + ")");
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      err = std::max(err, std::abs(tr.x1(i) - analytic_particle(cfg, tr.times(i))));
    st.max_errors.push_back(err);
  }

  double scale = 0.0;
  for (double e : st.max_errors) scale = std::max(scale, e);
  if (scale < 1e-10) {
    st.degenerate = true;
    return st;
  }

  // least-squares fit in log-log
  const int m = static_cast<int>(grid_list.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    const double x = std::log((base.t_final - base.t_init) / (grid_list[i] - 1));
    const double y = std::log(st.max_errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  st.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return st;
}

}  // namespace sbpact
