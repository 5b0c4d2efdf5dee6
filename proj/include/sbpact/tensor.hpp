#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "sbpact/grid.hpp"

namespace sbpact {

/// 2D fields live on the (tau, sigma) grid as matrices with row index k
/// (tau) and column index j (sigma). Flattening is tau-major: the flat
/// index of (k, j) is k * n_sigma + j.
using Field = Eigen::MatrixXd;

enum class Axis { tau, sigma };

/// A 1D operator lifted to the 2D grid via Kronecker structure: it acts
/// along its axis and as the identity along the other.
struct TensorOperator {
  Eigen::MatrixXd op;
  Axis axis = Axis::tau;
  int n_tau = 0;
  int n_sigma = 0;
};

inline TensorOperator tensorize(const Eigen::MatrixXd& op_1d, Axis axis,
                                const Grid1D& grid_tau, const Grid1D& grid_sigma) {
  const int need = axis == Axis::tau ? grid_tau.n : grid_sigma.n;
  if (op_1d.rows() != need || op_1d.cols() != need)
    throw std::invalid_argument("tensorize: operator dimension does not match axis grid");
  return TensorOperator{op_1d, axis, grid_tau.n, grid_sigma.n};
}

inline Field apply(const TensorOperator& t, const Field& f) {
  if (f.rows() != t.n_tau || f.cols() != t.n_sigma)
    throw std::invalid_argument("tensor apply: field shape mismatch");
  if (t.axis == Axis::tau) return t.op * f;
  return f * t.op.transpose();
}

/// 2D quadrature weights: outer product of the 1D weight vectors.
inline Field weights_2d(const Eigen::VectorXd& h_tau, const Eigen::VectorXd& h_sigma) {
  return h_tau * h_sigma.transpose();
}

inline Eigen::VectorXd flatten(const Field& f) {
  Eigen::VectorXd v(f.size());
  const int ns = static_cast<int>(f.cols());
  for (int k = 0; k < f.rows(); ++k)
    for (int j = 0; j < ns; ++j) v(k * ns + j) = f(k, j);
  return v;
}

inline Field unflatten(const Eigen::VectorXd& v, int n_tau, int n_sigma) {
  if (v.size() != static_cast<Eigen::Index>(n_tau) * n_sigma)
    throw std::invalid_argument("unflatten: size mismatch");
  Field f(n_tau, n_sigma);
  for (int k = 0; k < n_tau; ++k)
    for (int j = 0; j < n_sigma; ++j) f(k, j) = v(k * n_sigma + j);
  return f;
}

}  // namespace sbpact
