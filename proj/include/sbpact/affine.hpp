#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "sbpact/sbp.hpp"

namespace sbpact {

/// Regularized SBP derivative  D̄ x = D x + H^{-1} E_b (x - target e_b),
/// stored operationally as a homogeneous matrix plus a constant offset.
/// The (n+1)^2 extended matrix is a derived representation used for
/// spectral diagnostics only.
struct AffineOperator {
  Eigen::MatrixXd homogeneous;  // D + H^{-1} E_b
  Eigen::VectorXd offset;       // -target / h_b at entry b
  int boundary_index = 0;
  double target = 0.0;
  double spacing = 1.0;

  int n() const { return static_cast<int>(homogeneous.rows()); }
};

/// Penalize the derivative at a boundary entry with the given datum.
inline AffineOperator regularize(const SbpPair& p, int boundary_index, double target) {
  const int n = p.n();
  if (boundary_index != 0 && boundary_index != n - 1)
    throw std::invalid_argument("regularize: boundary index must be 0 or n-1");
  AffineOperator a;
  a.homogeneous = p.d;
  a.homogeneous(boundary_index, boundary_index) += 1.0 / p.h(boundary_index);
  a.offset = Eigen::VectorXd::Zero(n);
  a.offset(boundary_index) = -target / p.h(boundary_index);
  a.boundary_index = boundary_index;
  a.target = target;
  a.spacing = p.grid.spacing;
  return a;
}

inline Eigen::VectorXd apply_affine(const AffineOperator& a, const Eigen::VectorXd& x) {
  if (x.size() != a.n()) throw std::invalid_argument("apply_affine: length mismatch");
  return a.homogeneous * x + a.offset;
}

/// Extended (n+1)x(n+1) matrix: homogeneous block, offset column, unit corner.
/// With scaled=true the operator block is multiplied by the grid spacing, so
/// the matrix is dimensionless and the added eigenvalue sits exactly at 1.
inline Eigen::MatrixXd extended_matrix(const AffineOperator& a, bool scaled = true) {
  const int n = a.n();
  const double s = scaled ? a.spacing : 1.0;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n + 1, n + 1);
  e.topLeftCorner(n, n) = s * a.homogeneous;
  e.topRightCorner(n, 1) = s * a.offset;
  e(n, n) = scaled ? 1.0 : 1.0 / a.spacing;
  return e;
}

}  // namespace sbpact
