#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbpact/affine.hpp"
#include "sbpact/newton.hpp"
#include "sbpact/sbp.hpp"
#include "sbpact/tensor.hpp"

namespace sbpact {

/// (1+1)D scalar wave with a dynamical temporal map t(tau, sigma) and the
/// spatial map fixed to x = sigma, as a doubled discretized action.
struct WaveConfig {
  int n_tau = 30;
  int n_sigma = 24;
  double tau_min = 0.0, tau_max = 1.0;
  double sigma_min = 0.0, sigma_max = 1.0;
  double tension = 1e4;
  double bump_amplitude = 1.0;
  double bump_width = 0.08;
  double bump_center = 0.5;
  double dt0 = 1.05;  // initial uniform temporal-map rate
  double c = 1.0;     // wave speed; the reduced squared action fixes c = 1
  SbpOrder order = SbpOrder::d121;
  double grad_tolerance = 1e-12;
  int max_iterations = 60;

  Grid1D grid_tau() const { return make_grid(tau_min, tau_max, n_tau); }
  Grid1D grid_sigma() const { return make_grid(sigma_min, sigma_max, n_sigma); }

  double bump(double sigma) const {
    const double z = (sigma - bump_center) / bump_width;
    return bump_amplitude * std::exp(-z * z);
  }

  void validate() const {
    if (n_tau < 3 || n_sigma < 3) throw std::invalid_argument("WaveConfig: need n_tau, n_sigma >= 3");
    if (!(tau_max > tau_min) || !(sigma_max > sigma_min))
      throw std::invalid_argument("WaveConfig: empty span");
    if (!(tension > 0.0)) throw std::invalid_argument("WaveConfig: tension must be positive");
    if (!(bump_width > 0.0)) throw std::invalid_argument("WaveConfig: bump width must be positive");
    if (!(dt0 > 0.0)) throw std::invalid_argument("WaveConfig: dt0 must be positive");
    if (!(bump_center > sigma_min && bump_center < sigma_max))
      throw std::invalid_argument("WaveConfig: bump center must lie strictly inside the sigma span");
    if (std::abs(bump(sigma_min)) >= 1e-8 || std::abs(bump(sigma_max)) >= 1e-8)
      throw std::invalid_argument("WaveConfig: bump is not compactly small at the sigma boundaries");
  }
};

struct InitialData {
  Eigen::VectorXd phi0;   // A exp(-((sigma - c)/w)^2)
  Eigen::VectorXd dphi0;  // zero
  Eigen::VectorXd t0;     // zero
  Eigen::VectorXd dt0;    // uniform rate
};

inline InitialData build_initial_data(const WaveConfig& cfg) {
  cfg.validate();
  const Grid1D gs = cfg.grid_sigma();
  InitialData d;
  d.phi0.resize(gs.n);
  for (int j = 0; j < gs.n; ++j) d.phi0(j) = cfg.bump(gs.coord(j));
  d.dphi0 = Eigen::VectorXd::Zero(gs.n);
  d.t0 = Eigen::VectorXd::Zero(gs.n);
  d.dt0 = Eigen::VectorXd::Constant(gs.n, cfg.dt0);
  return d;
}

namespace wave_detail {

/// Unknown-vector layout. Initial-data and connecting-condition multipliers
/// for phi cover interior sigma indices only; the sigma endpoints are owned
/// by the Dirichlet multipliers (otherwise the constraint Jacobian is
/// rank-deficient). The t-map families cover all sigma indices.
struct Layout {
  int nt = 0, ns = 0, ni = 0, nf = 0;
  // segment order: phi1 phi2 t1 t2 | mu_pv mu_pd mu_tv mu_td | nu_pv nu_pd nu_tv nu_td | r1L r1R r2L r2R
  std::vector<int> offset;
  std::vector<int> size;

  enum Seg {
    phi1 = 0, phi2, t1, t2,
    mu_pv, mu_pd, mu_tv, mu_td,
    nu_pv, nu_pd, nu_tv, nu_td,
    r1l, r1r, r2l, r2r,
    seg_count
  };

  explicit Layout(int n_tau, int n_sigma) : nt(n_tau), ns(n_sigma), ni(n_sigma - 2), nf(n_tau * n_sigma) {
    size = {nf, nf, nf, nf, ni, ni, ns, ns, ni, ni, ns, ns, nt, nt, nt, nt};
    offset.resize(seg_count + 1);
    offset[0] = 0;
    for (int i = 0; i < seg_count; ++i) offset[i + 1] = offset[i] + size[i];
  }
  int dim() const { return offset[seg_count]; }
  Eigen::VectorBlock<const Eigen::VectorXd> seg(const Eigen::VectorXd& u, Seg s) const {
    return u.segment(offset[s], size[s]);
  }
};

struct Operators {
  WaveConfig cfg;
  Layout lay;
  SbpPair tau, sigma;
  Eigen::MatrixXd a_tau;   // regularized tau derivative, penalty at tau-index 0
  Eigen::MatrixXd a_sig;   // regularized sigma derivative for phi, penalty at left endpoint
  Field off_phi;           // affine offset field for the phi tau-derivative
  Field off_t;             // affine offset field for the t tau-derivative (zero data)
  Field w2;                // quadrature weights
  InitialData data;

  explicit Operators(const WaveConfig& c)
      : cfg(c), lay(c.n_tau, c.n_sigma),
        tau(build_sbp(c.order, c.grid_tau())),
        sigma(build_sbp(c.order, c.grid_sigma())) {
    data = build_initial_data(c);
    a_tau = tau.d;
    a_tau(0, 0) += 1.0 / tau.h(0);
    a_sig = sigma.d;
    a_sig(0, 0) += 1.0 / sigma.h(0);
    off_phi = Field::Zero(c.n_tau, c.n_sigma);
    off_phi.row(0) = -data.phi0.transpose() / tau.h(0);
    off_t = Field::Zero(c.n_tau, c.n_sigma);
    off_t.row(0) = -data.t0.transpose() / tau.h(0);
    w2 = weights_2d(tau.h, sigma.h);
  }

  Field phi_dot(const Field& phi) const { return a_tau * phi + off_phi; }
  Field phi_prime(const Field& phi) const { return phi * a_sig.transpose(); }
  Field t_dot(const Field& t) const { return a_tau * t + off_t; }
  Field t_prime(const Field& t) const { return t * sigma.d.transpose(); }
};

struct Derivs {
  Field td, tp, pd, pp;
};

inline Derivs derivs(const Operators& ops, const Field& phi, const Field& t) {
  return {ops.t_dot(t), ops.t_prime(t), ops.phi_dot(phi), ops.phi_prime(phi)};
}

/// Reduced squared action density
///   e = 1/2 { td^2 + (1/T)( pd^2 (tp^2 - 1) - 2 pd pp td tp + pp^2 td^2 ) }.
inline Field density(const Derivs& d, double tension) {
  const double it = 1.0 / tension;
  return 0.5 * (d.td.array().square() +
                it * (d.pd.array().square() * (d.tp.array().square() - 1.0) -
                      2.0 * d.pd.array() * d.pp.array() * d.td.array() * d.tp.array() +
                      d.pp.array().square() * d.td.array().square()))
      .matrix();
}

struct DensityPartials {
  Field e_td, e_tp, e_pd, e_pp;
};

inline DensityPartials density_partials(const Derivs& d, double tension) {
  const double it = 1.0 / tension;
  DensityPartials p;
  p.e_td = (d.td.array() + it * (d.pp.array().square() * d.td.array() -
                                 d.pd.array() * d.pp.array() * d.tp.array())).matrix();
  p.e_tp = (it * (d.pd.array().square() * d.tp.array() -
                  d.pd.array() * d.pp.array() * d.td.array())).matrix();
  p.e_pd = (it * (d.pd.array() * (d.tp.array().square() - 1.0) -
                  d.pp.array() * d.td.array() * d.tp.array())).matrix();
  p.e_pp = (it * (d.pp.array() * d.td.array().square() -
                  d.pd.array() * d.td.array() * d.tp.array())).matrix();
  return p;
}

double objective(const Operators& ops, const Eigen::VectorXd& u);
Eigen::VectorXd gradient(const Operators& ops, const Eigen::VectorXd& u);

inline double objective(const Operators& ops, const Eigen::VectorXd& u) {
  const Layout& L = ops.lay;
  const int nt = L.nt, ns = L.ns;
  const Field p1 = unflatten(L.seg(u, Layout::phi1), nt, ns);
  const Field p2 = unflatten(L.seg(u, Layout::phi2), nt, ns);
  const Field t1 = unflatten(L.seg(u, Layout::t1), nt, ns);
  const Field t2 = unflatten(L.seg(u, Layout::t2), nt, ns);
  const Derivs d1 = derivs(ops, p1, t1);
  const Derivs d2 = derivs(ops, p2, t2);
  double val = (ops.w2.array() * density(d1, ops.cfg.tension).array()).sum() -
               (ops.w2.array() * density(d2, ops.cfg.tension).array()).sum();

  const auto& hs = ops.sigma.h;
  const auto& ht = ops.tau.h;
  const auto mu_pv = L.seg(u, Layout::mu_pv);
  const auto mu_pd = L.seg(u, Layout::mu_pd);
  const auto mu_tv = L.seg(u, Layout::mu_tv);
  const auto mu_td = L.seg(u, Layout::mu_td);
  const auto nu_pv = L.seg(u, Layout::nu_pv);
  const auto nu_pd = L.seg(u, Layout::nu_pd);
  const auto nu_tv = L.seg(u, Layout::nu_tv);
  const auto nu_td = L.seg(u, Layout::nu_td);
  const int N = nt - 1;
  for (int j = 1; j < ns - 1; ++j) {
    const int i = j - 1;
    val += hs(j) * mu_pv(i) * (0.5 * (p1(0, j) + p2(0, j)) - ops.data.phi0(j));
    val += hs(j) * mu_pd(i) * (0.5 * (d1.pd(0, j) + d2.pd(0, j)) - ops.data.dphi0(j));
    val += hs(j) * nu_pv(i) * (p1(N, j) - p2(N, j));
    val += hs(j) * nu_pd(i) * (d1.pd(N, j) - d2.pd(N, j));
  }
  for (int j = 0; j < ns; ++j) {
    val += hs(j) * mu_tv(j) * (0.5 * (t1(0, j) + t2(0, j)) - ops.data.t0(j));
    val += hs(j) * mu_td(j) * (0.5 * (d1.td(0, j) + d2.td(0, j)) - ops.data.dt0(j));
    val += hs(j) * nu_tv(j) * (t1(N, j) - t2(N, j));
    val += hs(j) * nu_td(j) * (d1.td(N, j) - d2.td(N, j));
  }
  for (int k = 0; k < nt; ++k) {
    val += ht(k) * (L.seg(u, Layout::r1l)(k) * p1(k, 0) + L.seg(u, Layout::r1r)(k) * p1(k, ns - 1));
    val += ht(k) * (L.seg(u, Layout::r2l)(k) * p2(k, 0) + L.seg(u, Layout::r2r)(k) * p2(k, ns - 1));
  }
  return val;
}

inline Eigen::VectorXd gradient(const Operators& ops, const Eigen::VectorXd& u) {
  const Layout& L = ops.lay;
  const int nt = L.nt, ns = L.ns, N = nt - 1;
  const Field p1 = unflatten(L.seg(u, Layout::phi1), nt, ns);
  const Field p2 = unflatten(L.seg(u, Layout::phi2), nt, ns);
  const Field t1 = unflatten(L.seg(u, Layout::t1), nt, ns);
  const Field t2 = unflatten(L.seg(u, Layout::t2), nt, ns);
  const auto& hs = ops.sigma.h;
  const auto& ht = ops.tau.h;
  const auto mu_pv = L.seg(u, Layout::mu_pv);
  const auto mu_pd = L.seg(u, Layout::mu_pd);
  const auto mu_tv = L.seg(u, Layout::mu_tv);
  const auto mu_td = L.seg(u, Layout::mu_td);
  const auto nu_pv = L.seg(u, Layout::nu_pv);
  const auto nu_pd = L.seg(u, Layout::nu_pd);
  const auto nu_tv = L.seg(u, Layout::nu_tv);
  const auto nu_td = L.seg(u, Layout::nu_td);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(L.dim());
  Derivs ds[2] = {derivs(ops, p1, t1), derivs(ops, p2, t2)};

  for (int br = 0; br < 2; ++br) {
    const double sgn = br == 0 ? 1.0 : -1.0;
    const Derivs& d = ds[br];
    const DensityPartials pr = density_partials(d, ops.cfg.tension);
    Field gt = sgn * (ops.a_tau.transpose() * ops.w2.cwiseProduct(pr.e_td) +
                      ops.w2.cwiseProduct(pr.e_tp) * ops.sigma.d);
    Field gp = sgn * (ops.a_tau.transpose() * ops.w2.cwiseProduct(pr.e_pd) +
                      ops.w2.cwiseProduct(pr.e_pp) * ops.a_sig);

    // initial-data forces (+ combination: factor 1/2 per branch)
    for (int j = 1; j < ns - 1; ++j) {
      const int i = j - 1;
      gp(0, j) += 0.5 * hs(j) * mu_pv(i);
      for (int m = 0; m < nt; ++m) gp(m, j) += 0.5 * hs(j) * mu_pd(i) * ops.a_tau(0, m);
    }
    for (int j = 0; j < ns; ++j) {
      gt(0, j) += 0.5 * hs(j) * mu_tv(j);
      for (int m = 0; m < nt; ++m) gt(m, j) += 0.5 * hs(j) * mu_td(j) * ops.a_tau(0, m);
    }
    // connecting-condition forces (- combination: opposite signs per branch)
    for (int j = 1; j < ns - 1; ++j) {
      const int i = j - 1;
      gp(N, j) += sgn * hs(j) * nu_pv(i);
      for (int m = 0; m < nt; ++m) gp(m, j) += sgn * hs(j) * nu_pd(i) * ops.a_tau(N, m);
    }
    for (int j = 0; j < ns; ++j) {
      gt(N, j) += sgn * hs(j) * nu_tv(j);
      for (int m = 0; m < nt; ++m) gt(m, j) += sgn * hs(j) * nu_td(j) * ops.a_tau(N, m);
    }
    // Dirichlet forces
    const auto rl = L.seg(u, br == 0 ? Layout::r1l : Layout::r2l);
    const auto rr = L.seg(u, br == 0 ? Layout::r1r : Layout::r2r);
    for (int k = 0; k < nt; ++k) {
      gp(k, 0) += ht(k) * rl(k);
      gp(k, ns - 1) += ht(k) * rr(k);
    }

    grad.segment(L.offset[br == 0 ? Layout::phi1 : Layout::phi2], L.nf) = flatten(gp);
    grad.segment(L.offset[br == 0 ? Layout::t1 : Layout::t2], L.nf) = flatten(gt);
  }

  // constraint residuals
  auto s = [&](Layout::Seg seg) { return grad.segment(L.offset[seg], L.size[seg]); };
  for (int j = 1; j < ns - 1; ++j) {
    const int i = j - 1;
    s(Layout::mu_pv)(i) = hs(j) * (0.5 * (p1(0, j) + p2(0, j)) - ops.data.phi0(j));
    s(Layout::mu_pd)(i) = hs(j) * (0.5 * (ds[0].pd(0, j) + ds[1].pd(0, j)) - ops.data.dphi0(j));
    s(Layout::nu_pv)(i) = hs(j) * (p1(N, j) - p2(N, j));
    s(Layout::nu_pd)(i) = hs(j) * (ds[0].pd(N, j) - ds[1].pd(N, j));
  }
  for (int j = 0; j < ns; ++j) {
    s(Layout::mu_tv)(j) = hs(j) * (0.5 * (t1(0, j) + t2(0, j)) - ops.data.t0(j));
    s(Layout::mu_td)(j) = hs(j) * (0.5 * (ds[0].td(0, j) + ds[1].td(0, j)) - ops.data.dt0(j));
    s(Layout::nu_tv)(j) = hs(j) * (t1(N, j) - t2(N, j));
    s(Layout::nu_td)(j) = hs(j) * (ds[0].td(N, j) - ds[1].td(N, j));
  }
  for (int k = 0; k < nt; ++k) {
    s(Layout::r1l)(k) = ht(k) * p1(k, 0);
    s(Layout::r1r)(k) = ht(k) * p1(k, ns - 1);
    s(Layout::r2l)(k) = ht(k) * p2(k, 0);
    s(Layout::r2r)(k) = ht(k) * p2(k, ns - 1);
  }
  return grad;
}

/// Solve the restriction of the gradient system to an index set on which it
/// is exactly linear (equilibrated LU plus one refinement pass).
inline void linear_subsolve(const Operators& ops, Eigen::VectorXd& u, const std::vector<int>& idx) {
  const int m = static_cast<int>(idx.size());
  Eigen::VectorXd g_full = gradient(ops, u);
  Eigen::VectorXd g0(m);
  for (int a = 0; a < m; ++a) g0(a) = g_full(idx[a]);
  Eigen::MatrixXd mat(m, m);
  Eigen::VectorXd up = u;
  for (int a = 0; a < m; ++a) {
    up(idx[a]) += 1.0;
    const Eigen::VectorXd gp = gradient(ops, up);
    for (int r = 0; r < m; ++r) mat(r, a) = gp(idx[r]) - g0(r);
    up(idx[a]) = u(idx[a]);
  }
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i)
    d(i) = std::sqrt(std::max(mat.row(i).cwiseAbs().maxCoeff(), 1e-300));
  const Eigen::MatrixXd ms = d.cwiseInverse().asDiagonal() * mat * d.cwiseInverse().asDiagonal();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(ms);
  Eigen::VectorXd du = lu.solve(-g0.cwiseQuotient(d)).cwiseQuotient(d);
  for (int a = 0; a < m; ++a) u(idx[a]) += du(a);
  // one refinement pass
  g_full = gradient(ops, u);
  for (int a = 0; a < m; ++a) g0(a) = g_full(idx[a]);
  du = lu.solve(-g0.cwiseQuotient(d)).cwiseQuotient(d);
  for (int a = 0; a < m; ++a) u(idx[a]) += du(a);
}

inline std::vector<int> segment_indices(const Layout& L, std::initializer_list<Layout::Seg> segs) {
  std::vector<int> idx;
  for (auto s : segs)
    for (int i = 0; i < L.size[s]; ++i) idx.push_back(L.offset[s] + i);
  return idx;
}

/// Linear-map initial state: phi = 0, t = dt0 * tau on both branches.
inline Eigen::VectorXd linear_map_state(const Operators& ops) {
  const Layout& L = ops.lay;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(L.dim());
  Field tlin(L.nt, L.ns);
  const Grid1D gt = ops.cfg.grid_tau();
  for (int k = 0; k < L.nt; ++k)
    tlin.row(k).setConstant(ops.cfg.dt0 * (gt.coord(k) - ops.cfg.tau_min));
  u.segment(L.offset[Layout::t1], L.nf) = flatten(tlin);
  u.segment(L.offset[Layout::t2], L.nf) = flatten(tlin);
  return u;
}

}  // namespace wave_detail

struct FieldSolution {
  WaveConfig config;
  Field phi1, phi2, tmap1, tmap2;
  Eigen::VectorXd raw;  // full unknown vector including multipliers
  SolverReport report;
  bool causal = false;  // min over the grid of dtau t > 0

  Eigen::VectorXd multiplier(const std::string& name) const {
    using L = wave_detail::Layout;
    static const std::vector<std::pair<std::string, L::Seg>> table = {
        {"mu_phi_value", L::mu_pv}, {"mu_phi_dot", L::mu_pd},
        {"mu_t_value", L::mu_tv},   {"mu_t_dot", L::mu_td},
        {"nu_phi_value", L::nu_pv}, {"nu_phi_dot", L::nu_pd},
        {"nu_t_value", L::nu_tv},   {"nu_t_dot", L::nu_td},
        {"dirichlet_1_left", L::r1l}, {"dirichlet_1_right", L::r1r},
        {"dirichlet_2_left", L::r2l}, {"dirichlet_2_right", L::r2r}};
    const L lay(config.n_tau, config.n_sigma);
    for (const auto& [nm, seg] : table)
      if (nm == name) return raw.segment(lay.offset[seg], lay.size[seg]);
    throw std::invalid_argument("FieldSolution: unknown multiplier family " + name);
  }
};

/// The doubled wave action as a generic stationarity problem; the gradient is
/// assembled analytically, the Jacobian is left to finite differences.
inline StationarityProblem assemble_wave_action(const WaveConfig& cfg) {
  cfg.validate();
  auto ops = std::make_shared<wave_detail::Operators>(cfg);
  StationarityProblem p;
  p.dimension = ops->lay.dim();
  p.grad_tolerance = cfg.grad_tolerance;
  p.max_iterations = cfg.max_iterations;
  p.objective = [ops](const Eigen::VectorXd& u) { return wave_detail::objective(*ops, u); };
  p.gradient = [ops](const Eigen::VectorXd& u) { return wave_detail::gradient(*ops, u); };
  p.initial_guess = wave_detail::linear_map_state(*ops);
  return p;
}

namespace wave_detail {

inline FieldSolution package(const Operators& ops, Eigen::VectorXd u, SolverReport rep) {
  const Layout& L = ops.lay;
  FieldSolution sol;
  sol.config = ops.cfg;
  sol.phi1 = unflatten(L.seg(u, Layout::phi1), L.nt, L.ns);
  sol.phi2 = unflatten(L.seg(u, Layout::phi2), L.nt, L.ns);
  sol.tmap1 = unflatten(L.seg(u, Layout::t1), L.nt, L.ns);
  sol.tmap2 = unflatten(L.seg(u, Layout::t2), L.nt, L.ns);
  sol.raw = std::move(u);
  sol.report = std::move(rep);
  sol.causal = ops.t_dot(sol.tmap1).minCoeff() > 0.0;
  return sol;
}

}  // namespace wave_detail

/// Reference solve with the temporal map frozen to t = dt0 * tau: the action
/// is quadratic in phi, so this is a single linear solve. Serves as the
/// fixed-grid SBP wave oracle for the decoupling limit and as the warm start.
inline FieldSolution solve_wave_fixed_map(const WaveConfig& cfg) {
  cfg.validate();
  using L = wave_detail::Layout;
  wave_detail::Operators ops(cfg);
  Eigen::VectorXd u = wave_detail::linear_map_state(ops);
  const auto idx = wave_detail::segment_indices(
      ops.lay, {L::phi1, L::phi2, L::mu_pv, L::mu_pd, L::nu_pv, L::nu_pd,
                L::r1l, L::r1r, L::r2l, L::r2r});
  wave_detail::linear_subsolve(ops, u, idx);
  SolverReport rep;
  rep.converged = true;
  rep.iterations = 1;
  Eigen::VectorXd g = wave_detail::gradient(ops, u);
  double gn = 0.0;
  for (int i : idx) gn = std::max(gn, std::abs(g(i)));
  rep.final_grad_norm = gn;  // phi-sector residual; t-sector is not solved here
  rep.residual_history = {gn};
  return wave_detail::package(ops, std::move(u), std::move(rep));
}

/// Full doubled solve. Three stages: (1) fixed-map phi solve, (2) t-sector
/// solve at frozen phi (both exactly linear), (3) Newton on the coupled
/// system. An optional warm start (e.g. a previous solution) replaces the
/// first two stages.
inline FieldSolution solve_wave(const WaveConfig& cfg,
                                const Eigen::VectorXd& warm_start = Eigen::VectorXd()) {
  cfg.validate();
  using L = wave_detail::Layout;
  wave_detail::Operators ops(cfg);
  Eigen::VectorXd u;
  if (warm_start.size() > 0) {
    if (warm_start.size() != ops.lay.dim())
      throw std::invalid_argument("solve_wave: warm start dimension mismatch");
    u = warm_start;
  } else {
    u = wave_detail::linear_map_state(ops);
    wave_detail::linear_subsolve(
        ops, u, wave_detail::segment_indices(ops.lay, {L::phi1, L::phi2, L::mu_pv, L::mu_pd,
                                                       L::nu_pv, L::nu_pd, L::r1l, L::r1r,
                                                       L::r2l, L::r2r}));
    wave_detail::linear_subsolve(
        ops, u, wave_detail::segment_indices(ops.lay, {L::t1, L::t2, L::mu_tv, L::mu_td,
                                                       L::nu_tv, L::nu_td}));
  }
  StationarityProblem p = assemble_wave_action(cfg);
  p.initial_guess = std::move(u);
  auto [sol, rep] = solve_stationary(p);
  return wave_detail::package(ops, std::move(sol), std::move(rep));
}

/// dtau of the temporal map; large values mean coarse time resolution.
inline Field resolution_map(const FieldSolution& sol) {
  wave_detail::Operators ops(sol.config);
  return ops.t_dot(sol.tmap1);
}

/// Induced metric g_ab = G_uv (D^u_a X^u)(D^v_b X^v) for x = sigma,
/// G = diag(c^2, -1), evaluated entry-wise on the grid.
struct InducedMetricFields {
  Field g00, g01, g11;
  Field det_g;
  Field adj00, adj01, adj11;
};

inline InducedMetricFields assemble_induced_metric(const Field& tmap, const WaveConfig& cfg) {
  if (tmap.rows() != cfg.n_tau || tmap.cols() != cfg.n_sigma)
    throw std::invalid_argument("assemble_induced_metric: shape mismatch");
  wave_detail::Operators ops(cfg);
  const Field td = ops.t_dot(tmap);
  const Field tp = ops.t_prime(tmap);
  const double c2 = cfg.c * cfg.c;
  InducedMetricFields m;
  m.g00 = c2 * td.array().square().matrix();
  m.g01 = (c2 * td.array() * tp.array()).matrix();
  m.g11 = (c2 * tp.array().square() - 1.0).matrix();
  m.det_g = (m.g00.array() * m.g11.array() - m.g01.array().square()).matrix();
  m.adj00 = m.g11;
  m.adj01 = -m.g01;
  m.adj11 = m.g00;
  return m;
}

/// Square-root (Nambu-Goto-type) action density -T sqrt(-det g + (1/T) d_a phi
/// d_b phi adj[g]_ab); evaluation only, never optimized.
inline Field nambu_goto_density(const Field& phi, const Field& tmap, const WaveConfig& cfg) {
  const InducedMetricFields m = assemble_induced_metric(tmap, cfg);
  wave_detail::Operators ops(cfg);
  const Field pd = ops.phi_dot(phi);
  const Field pp = ops.phi_prime(phi);
  const double it = 1.0 / cfg.tension;
  Field arg = (-m.det_g.array() +
               it * (pd.array().square() * m.adj00.array() +
                     2.0 * pd.array() * pp.array() * m.adj01.array() +
                     pp.array().square() * m.adj11.array()))
                  .matrix();
  return (-cfg.tension * arg.array().max(0.0).sqrt()).matrix();
}

}  // namespace sbpact
