#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "sbpact/wave.hpp"

namespace sbpact {

/// Time-translation charge density tdot + (1/T)((phi')^2 tdot - phidot phi' t');
/// identical to the partial derivative of the squared action density with
/// respect to tdot, which is what makes the integrated charge exactly
/// conserved at stationary points.
inline Field charge_density(const Field& phi_dot, const Field& phi_prime, const Field& t_dot,
                            const Field& t_prime, double tension) {
  if (phi_dot.rows() != phi_prime.rows() || phi_dot.cols() != phi_prime.cols() ||
      phi_dot.rows() != t_dot.rows() || phi_dot.cols() != t_dot.cols() ||
      phi_dot.rows() != t_prime.rows() || phi_dot.cols() != t_prime.cols())
    throw std::invalid_argument("charge_density: shape mismatch");
  if (!(tension > 0.0)) throw std::invalid_argument("charge_density: tension must be positive");
  const double it = 1.0 / tension;
  return (t_dot.array() + it * (phi_prime.array().square() * t_dot.array() -
                                phi_dot.array() * phi_prime.array() * t_prime.array()))
      .matrix();
}

struct ChargeSeries {
  Eigen::VectorXd values;         // Q(tau_k), endpoint multiplier terms included
  double endpoint_term_initial = 0.0;
  double endpoint_term_final = 0.0;
  double initial_value = 0.0;
  double max_abs_deviation = 0.0;
};

/// Per-slice discrete Noether charge of the converged branch-1 solution:
///   Q[k] = sum_j hsig_j e_td[k,j] + d0[0][k] (hsig . mu_td)/2 + d0[N][k] (hsig . nu_td)
/// with the quadrature-consistent discrete delta d0[i][k] = delta_ki / htau_i.
/// The lambda/gamma entering here are the dtau-constraint multipliers of the
/// t-map; the initial-end term vanishes identically because the tau = 0
/// affine penalty absorbs that boundary term.
inline ChargeSeries charge_series(const FieldSolution& sol, const WaveConfig& cfg) {
  if (!sol.report.converged)
    throw std::invalid_argument("charge_series: solution is not converged");
  wave_detail::Operators ops(cfg);
  const Field td = ops.t_dot(sol.tmap1);
  const Field tp = ops.t_prime(sol.tmap1);
  const Field pd = ops.phi_dot(sol.phi1);
  const Field pp = ops.phi_prime(sol.phi1);
  const Field dens = charge_density(pd, pp, td, tp, cfg.tension);

  ChargeSeries cs;
  cs.values = dens * ops.sigma.h;  // sigma-quadrature per tau slice
  const Eigen::VectorXd mu_td = sol.multiplier("mu_t_dot");
  const Eigen::VectorXd nu_td = sol.multiplier("nu_t_dot");
  cs.endpoint_term_initial = 0.5 * ops.sigma.h.dot(mu_td) / ops.tau.h(0);
  cs.endpoint_term_final = ops.sigma.h.dot(nu_td) / ops.tau.h(cfg.n_tau - 1);
  cs.values(0) += cs.endpoint_term_initial;
  cs.values(cfg.n_tau - 1) += cs.endpoint_term_final;
  cs.initial_value = cs.values(0);
  cs.max_abs_deviation = (cs.values.array() - cs.initial_value).abs().maxCoeff();
  return cs;
}

struct RefinementBalance {
  Eigen::VectorXd series;  // per-slice right-mover balance integral
  double correlation = 0.0;
  bool correlation_defined = false;
};

/// Right-mover balance: per slice the integral of tdot + (1/T)(phi')^2 (tdot + t'),
/// plus the grid-wide Pearson correlation between (phi')^2 and (tdot + t').
/// Stronger field gradients must come with smaller map derivatives for the
/// charge to stay constant, so the correlation is negative on bump runs.
inline RefinementBalance refinement_balance(const FieldSolution& sol, const WaveConfig& cfg) {
  wave_detail::Operators ops(cfg);
  const Field td = ops.t_dot(sol.tmap1);
  const Field tp = ops.t_prime(sol.tmap1);
  const Field pp = ops.phi_prime(sol.phi1);
  const double it = 1.0 / cfg.tension;

  RefinementBalance rb;
  const Field integrand =
      (td.array() + it * pp.array().square() * (td.array() + tp.array())).matrix();
  rb.series = integrand * ops.sigma.h;

  const Eigen::ArrayXXd a = pp.array().square();
  const Eigen::ArrayXXd b = td.array() + tp.array();
  const double na = static_cast<double>(a.size());
  const double ma = a.sum() / na, mb = b.sum() / na;
  const double va = ((a - ma) * (a - ma)).sum();
  const double vb = ((b - mb) * (b - mb)).sum();
  if (va > 1e-24 && vb > 1e-24) {
    rb.correlation = ((a - ma) * (b - mb)).sum() / std::sqrt(va * vb);
    rb.correlation_defined = true;
  }
  return rb;
}

}  // namespace sbpact
