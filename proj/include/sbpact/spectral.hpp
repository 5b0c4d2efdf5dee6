#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace sbpact {

/// Zero-mode bases of a matrix. The SBP derivative has a *defective* zero
/// eigenvalue (its two zero modes share one eigenvector), so the kernel of
/// M alone under-counts; the algebraic zero-mode space is the kernel of
/// M^k once the SVD rank has stabilized in k.
struct NullSpaceReport {
  int dim_right = 0;
  int dim_left = 0;
  Eigen::MatrixXd right_basis;  // columns, unit norm
  Eigen::MatrixXd left_basis;   // columns, unit norm
  double tolerance = 0.0;
  int stabilized_power = 1;
};

struct SpectrumReport {
  Eigen::VectorXcd eigenvalues;  // sorted by real part
  double min_abs = 0.0;
  double min_real_part = 0.0;
  bool has_unit_eigenvalue = false;
};

namespace detail {

inline int svd_kernel_dim(const Eigen::MatrixXd& m, double rel_tol,
                          Eigen::MatrixXd* right = nullptr, Eigen::MatrixXd* left = nullptr) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cut = rel_tol * (s.size() ? s(0) : 0.0);
  int dim = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) <= cut) ++dim;
  if (right) *right = svd.matrixV().rightCols(dim);
  if (left) *left = svd.matrixU().rightCols(dim);
  return dim;
}

inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& b) {
  if (b.cols() == 0) return b;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), b.cols());
  return q;
}

}  // namespace detail

/// Algebraic zero-mode space of a square matrix via rank-revealing SVD of
/// stabilized powers. An optional positive quadrature weight makes the left
/// basis refer to the weighted adjoint M* = H^{-1} M^T H, i.e. the left zero
/// modes of the operator in the quadrature inner product.
inline NullSpaceReport null_space(const Eigen::MatrixXd& m, double tolerance = 1e-10,
                                  const Eigen::VectorXd& weight = Eigen::VectorXd()) {
  if (m.rows() != m.cols()) throw std::invalid_argument("null_space: matrix must be square");
  if (!(tolerance > 0.0)) throw std::invalid_argument("null_space: tolerance must be positive");
  const int n = static_cast<int>(m.rows());
  const bool weighted = weight.size() > 0;
  if (weighted && weight.size() != n)
    throw std::invalid_argument("null_space: weight length mismatch");

  NullSpaceReport rep;
  rep.tolerance = tolerance;
  Eigen::MatrixXd power = m;
  int k = 1;
  int dim = detail::svd_kernel_dim(power, tolerance);
  while (k < n) {
    Eigen::MatrixXd next = power * power;
    const int dim2 = detail::svd_kernel_dim(next, tolerance);
    if (dim2 <= dim) break;
    power = next;
    dim = dim2;
    k *= 2;
  }
  rep.stabilized_power = k;
  Eigen::MatrixXd right, left;
  rep.dim_right = detail::svd_kernel_dim(power, tolerance, &right, &left);
  rep.dim_left = rep.dim_right;
  rep.right_basis = right;
  if (weighted) {
    // ker((M*)^k) = H^{-1} ker((M^T)^k)
    Eigen::MatrixXd scaled = weight.cwiseInverse().asDiagonal() * left;
    rep.left_basis = detail::orthonormalize(scaled);
  } else {
    rep.left_basis = left;
  }
  return rep;
}

/// Dense nonsymmetric eigendecomposition with summary flags.
inline SpectrumReport spectrum(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("spectrum: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectrum: eigensolver failed to converge");
  Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  SpectrumReport rep;
  rep.eigenvalues = Eigen::Map<Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
  rep.min_abs = rep.eigenvalues.size() ? std::abs(v[0]) : 0.0;
  rep.min_real_part = rep.eigenvalues.size() ? v[0].real() : 0.0;
  rep.has_unit_eigenvalue = false;
  for (const auto& z : v) {
    rep.min_abs = std::min(rep.min_abs, std::abs(z));
    rep.min_real_part = std::min(rep.min_real_part, z.real());
    if (std::abs(z - std::complex<double>(1.0, 0.0)) < 1e-10) rep.has_unit_eigenvalue = true;
  }
  return rep;
}

/// Normalized overlap with the maximally oscillating grid function (-1)^j.
inline double pi_mode_overlap(const Eigen::VectorXd& v) {
  const double nv = v.norm();
  if (nv == 0.0) throw std::invalid_argument("pi_mode_overlap: zero vector");
  double dot = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) dot += (j % 2 == 0 ? v(j) : -v(j));
  return std::abs(dot) / (nv * std::sqrt(static_cast<double>(v.size())));
}

/// Projection of a unit-norm direction onto the span of basis columns.
inline double span_projection(const Eigen::MatrixXd& basis, Eigen::VectorXd v) {
  v.normalize();
  if (basis.cols() == 0) return 0.0;
  return (basis.transpose() * v).norm();
}

}  // namespace sbpact
