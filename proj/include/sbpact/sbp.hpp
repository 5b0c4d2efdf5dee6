#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sbpact/grid.hpp"

namespace sbpact {

enum class SbpOrder { d121, d424 };

inline std::string to_string(SbpOrder o) {
  return o == SbpOrder::d121 ? "[1,2,1]" : "[4,2,4]";
}

/// Summation-by-parts operator pair on a uniform grid.
///
/// h holds the diagonal of the quadrature matrix H, q the stencil matrix
/// with q + q^T = E_N - E_1, and d = H^{-1} q the derivative operator.
struct SbpPair {
  Grid1D grid;
  SbpOrder order = SbpOrder::d121;
  Eigen::VectorXd h;
  Eigen::MatrixXd q;
  Eigen::MatrixXd d;

  int n() const { return grid.n; }
};

namespace detail {

inline void build_121(int n, Eigen::VectorXd& h, Eigen::MatrixXd& q) {
  h.setOnes(n);
  h(0) = h(n - 1) = 0.5;
  q.setZero(n, n);
  q(0, 0) = -0.5;
  q(0, 1) = 0.5;
  q(n - 1, n - 1) = 0.5;
  q(n - 1, n - 2) = -0.5;
  for (int i = 1; i < n - 1; ++i) {
    q(i, i - 1) = -0.5;
    q(i, i + 1) = 0.5;
  }
}

// Standard diagonal-norm closure: 4th order interior, 2nd order boundary.
// The boundary block is mirrored antisymmetrically so that q + q^T - (E_N - E_1)
// vanishes exactly in floating point.
inline void build_424(int n, Eigen::VectorXd& h, Eigen::MatrixXd& q) {
  const double hb[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
  h.setOnes(n);
  for (int i = 0; i < 4; ++i) {
    h(i) = hb[i];
    h(n - 1 - i) = hb[i];
  }
  const double qb[4][6] = {
      {-1.0 / 2.0, 59.0 / 96.0, -1.0 / 12.0, -1.0 / 32.0, 0.0, 0.0},
      {-59.0 / 96.0, 0.0, 59.0 / 96.0, 0.0, 0.0, 0.0},
      {1.0 / 12.0, -59.0 / 96.0, 0.0, 59.0 / 96.0, -1.0 / 12.0, 0.0},
      {1.0 / 32.0, 0.0, -59.0 / 96.0, 0.0, 2.0 / 3.0, -1.0 / 12.0}};
  q.setZero(n, n);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j) {
      q(i, j) = qb[i][j];
      q(n - 1 - i, n - 1 - j) = -qb[i][j];
    }
  for (int i = 4; i < n - 4; ++i) {
    q(i, i - 2) = 1.0 / 12.0;
    q(i, i - 1) = -2.0 / 3.0;
    q(i, i + 1) = 2.0 / 3.0;
    q(i, i + 2) = -1.0 / 12.0;
  }
}

}  // namespace detail

/// Build an SBP pair of the requested order. The grid must be large enough
/// for the boundary closure (n >= 2 for [1,2,1], n >= 8 for [4,2,4]).
inline SbpPair build_sbp(SbpOrder order, const Grid1D& grid) {
  grid.validate();
  SbpPair p;
  p.grid = grid;
  p.order = order;
  const int n = grid.n;
  if (order == SbpOrder::d121) {
    detail::build_121(n, p.h, p.q);
  } else {
    if (n < 8)
      throw std::invalid_argument("build_sbp: [4,2,4] closure needs n >= 8, got " +
                                  std::to_string(n));
    detail::build_424(n, p.h, p.q);
  }
  p.h *= grid.spacing;
  p.d = p.h.cwiseInverse().asDiagonal() * p.q;
  return p;
}

/// Max-norm of q + q^T - (E_N - E_1); exactly zero for a valid pair.
inline double sbp_condition_residual(const SbpPair& p) {
  const int n = p.n();
  Eigen::MatrixXd s = p.q + p.q.transpose();
  s(0, 0) += 1.0;
  s(n - 1, n - 1) -= 1.0;
  return s.cwiseAbs().maxCoeff();
}

/// Residual of the integration-by-parts mimicry
///   (D u)^T H v + u^T H (D v) - (u_N v_N - u_0 v_0).
inline double check_sbp_identity(const SbpPair& p, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& v) {
  const int n = p.n();
  if (u.size() != n || v.size() != n)
    throw std::invalid_argument("check_sbp_identity: length mismatch");
  const Eigen::VectorXd du = p.d * u;
  const Eigen::VectorXd dv = p.d * v;
  const double lhs = du.dot(p.h.cwiseProduct(v)) + u.dot(p.h.cwiseProduct(dv));
  const double boundary = u(n - 1) * v(n - 1) - u(0) * v(0);
  return std::abs(lhs - boundary);
}

}  // namespace sbpact
