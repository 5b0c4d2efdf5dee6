// Command-line driver: one subcommand per reproduction experiment.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure, 3 invariant violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sbpact/affine.hpp"
#include "sbpact/io.hpp"
#include "sbpact/noether.hpp"
#include "sbpact/particle.hpp"
#include "sbpact/sbp.hpp"
#include "sbpact/spectral.hpp"
#include "sbpact/wave.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbpact;

namespace {

constexpr int kSchemaVersion = 1;

fs::path resolve_out(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("SBPACT_OUT")) return env;
  return "sbpact_out";
}

SbpOrder parse_order(const std::string& s) {
  if (s == "121") return SbpOrder::d121;
  if (s == "424") return SbpOrder::d424;
  throw CLI::ValidationError("--order", "must be 121 or 424");
}

std::string order_tag(SbpOrder o) { return o == SbpOrder::d121 ? "121" : "424"; }

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

json solver_json(const SolverReport& r) {
  return json{{"converged", r.converged},
              {"iterations", r.iterations},
              {"final_grad_norm", r.final_grad_norm},
              {"fallback_steps", r.fallback_steps},
              {"failure", r.failure},
              {"residual_history", r.residual_history}};
}

json wave_config_json(const WaveConfig& c) {
  return json{{"n_tau", c.n_tau},
              {"n_sigma", c.n_sigma},
              {"tau_min", c.tau_min},
              {"tau_max", c.tau_max},
              {"sigma_min", c.sigma_min},
              {"sigma_max", c.sigma_max},
              {"tension", c.tension},
              {"bump_amplitude", c.bump_amplitude},
              {"bump_width", c.bump_width},
              {"bump_center", c.bump_center},
              {"dt0", c.dt0},
              {"c", c.c},
              {"order", order_tag(c.order)},
              {"grad_tolerance", c.grad_tolerance},
              {"max_iterations", c.max_iterations}};
}

WaveConfig wave_config_from_json(const json& j) {
  WaveConfig c;
  c.n_tau = j.value("n_tau", c.n_tau);
  c.n_sigma = j.value("n_sigma", c.n_sigma);
  c.tau_min = j.value("tau_min", c.tau_min);
  c.tau_max = j.value("tau_max", c.tau_max);
  c.sigma_min = j.value("sigma_min", c.sigma_min);
  c.sigma_max = j.value("sigma_max", c.sigma_max);
  c.tension = j.value("tension", c.tension);
  c.bump_amplitude = j.value("bump_amplitude", c.bump_amplitude);
  c.bump_width = j.value("bump_width", c.bump_width);
  c.bump_center = j.value("bump_center", c.bump_center);
  c.dt0 = j.value("dt0", c.dt0);
  c.c = j.value("c", c.c);
  if (j.contains("order")) c.order = parse_order(j["order"].get<std::string>());
  c.grad_tolerance = j.value("grad_tolerance", c.grad_tolerance);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  return c;
}

void dump_matrix_csv(const fs::path& path, const Eigen::MatrixXd& m) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < m.cols(); ++j) header.push_back("c" + std::to_string(j));
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const std::string& order_str, int n, bool regularized, double target,
                 bool unscaled, bool dump_ops, const fs::path& out) {
  const SbpOrder order = parse_order(order_str);
  const SbpPair pair = build_sbp(order, make_grid(0.0, 1.0, n));
  fs::create_directories(out);

  Eigen::MatrixXd matrix;
  if (regularized) {
    const AffineOperator a = regularize(pair, 0, target);
    matrix = extended_matrix(a, !unscaled);
  } else {
    matrix = unscaled ? pair.d : (pair.grid.spacing * pair.d).eval();
  }
  const SpectrumReport sp = spectrum(matrix);

  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < sp.eigenvalues.size(); ++i)
    rows.push_back({sp.eigenvalues(i).real(), sp.eigenvalues(i).imag()});
  write_csv(out / "spectrum.csv", {"re", "im"}, rows);

  if (dump_ops) {
    dump_matrix_csv(out / "q.csv", pair.q);
    dump_matrix_csv(out / "d.csv", pair.d);
    dump_matrix_csv(out / "h.csv", pair.h.transpose());
  }

  write_json(out / "config.json", json{{"order", order_str},
                                       {"n", n},
                                       {"regularized", regularized},
                                       {"target", target},
                                       {"scaled", !unscaled}});
  write_json(out / "report.json",
             json{{"schema_version", kSchemaVersion},
                  {"eigenvalue_count", sp.eigenvalues.size()},
                  {"min_abs", sp.min_abs},
                  {"min_real_part", sp.min_real_part},
                  {"has_unit_eigenvalue", sp.has_unit_eigenvalue}});
  return 0;
}

int cmd_particle(const ParticleConfig& cfg, bool fd_jacobian, const fs::path& out) {
  fs::create_directories(out);
  const auto t0 = std::chrono::steady_clock::now();
  DoubledTrajectory tr;
  if (fd_jacobian) {
    StationarityProblem p = assemble_particle_action(cfg);
    p.jacobian = nullptr;  // fall back to finite differences
    auto [u, rep] = solve_stationary(p);
    tr.x1 = u.segment(0, cfg.n_t);
    tr.x2 = u.segment(cfg.n_t, cfg.n_t);
    tr.lambdas = u.segment(2 * cfg.n_t, 4);
    tr.report = std::move(rep);
    tr.times.resize(cfg.n_t);
    for (int i = 0; i < cfg.n_t; ++i) tr.times(i) = cfg.grid().coord(i);
  } else {
    tr = solve_particle(cfg);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<std::vector<double>> rows;
  Eigen::VectorXd resid(cfg.n_t);
  double max_err = 0.0;
  for (int i = 0; i < cfg.n_t; ++i) {
    const double xa = analytic_particle(cfg, tr.times(i));
    resid(i) = tr.x1(i) - xa;
    max_err = std::max(max_err, std::abs(resid(i)));
    rows.push_back({tr.times(i), tr.x1(i), tr.x2(i), xa});
  }
  write_csv(out / "trajectory.csv", {"t", "x1", "x2", "x_analytic"}, rows);

  const double overlap = resid.cwiseAbs().maxCoeff() > 0.0 ? pi_mode_overlap(resid) : 0.0;
  const double branch_gap = (tr.x1 - tr.x2).cwiseAbs().maxCoeff();
  write_json(out / "config.json", json{{"mass", cfg.mass},
                                       {"g", cfg.g},
                                       {"x_init", cfg.x_init},
                                       {"v_init", cfg.v_init},
                                       {"t_init", cfg.t_init},
                                       {"t_final", cfg.t_final},
                                       {"n_t", cfg.n_t},
                                       {"order", order_tag(cfg.order)},
                                       {"regularized", cfg.regularized},
                                       {"grad_tolerance", cfg.grad_tolerance}});
  write_json(out / "report.json",
             json{{"schema_version", kSchemaVersion},
                  {"max_abs_error", max_err},
                  {"pi_overlap", overlap},
                  {"pi_mode_detected", overlap > 0.5},
                  {"branch_asymmetry", branch_gap},
                  {"lambdas", {tr.lambdas(0), tr.lambdas(1), tr.lambdas(2), tr.lambdas(3)}},
                  {"solver", solver_json(tr.report)},
                  {"timing_seconds", secs}});
  if (!tr.report.converged) {
    std::cerr << "particle: solver failed (" << tr.report.failure << ")\n";
    return 2;
  }
  return 0;
}

int cmd_converge(const ParticleConfig& cfg, const std::vector<int>& grids, const fs::path& out) {
  fs::create_directories(out);
  const ConvergenceStudy st = convergence_study(cfg, grids);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < st.grids.size(); ++i)
    rows.push_back({static_cast<double>(st.grids[i]),
                    (cfg.t_final - cfg.t_init) / (st.grids[i] - 1), st.max_errors[i]});
  write_csv(out / "converge.csv", {"n_t", "dt", "max_error"}, rows);
  write_json(out / "config.json", json{{"g", cfg.g},
                                       {"v_init", cfg.v_init},
                                       {"order", order_tag(cfg.order)},
                                       {"regularized", cfg.regularized},
                                       {"grids", grids}});
  write_json(out / "report.json", json{{"schema_version", kSchemaVersion},
                                       {"slope", st.slope},
                                       {"degenerate", st.degenerate}});
  return 0;
}

void write_wave_bundle(const WaveConfig& cfg, const FieldSolution& sol, const ChargeSeries* cs,
                       double secs, const json& invariants, const fs::path& out) {
  write_json(out / "config.json", wave_config_json(cfg));

  wave_detail::Operators ops(cfg);
  const Field tdot = ops.t_dot(sol.tmap1);
  const Grid1D gt = cfg.grid_tau(), gs = cfg.grid_sigma();
  std::vector<std::vector<double>> rows;
  for (int k = 0; k < cfg.n_tau; ++k)
    for (int j = 0; j < cfg.n_sigma; ++j)
      rows.push_back({static_cast<double>(k), static_cast<double>(j), gt.coord(k), gs.coord(j),
                      sol.phi1(k, j), sol.phi2(k, j), sol.tmap1(k, j), sol.tmap2(k, j),
                      tdot(k, j)});
  write_csv(out / "fields.csv",
            {"k", "j", "tau", "sigma", "phi1", "phi2", "t1", "t2", "tdot1"}, rows);

  // multipliers, one family per block
  static const char* families[] = {"mu_phi_value", "mu_phi_dot", "mu_t_value", "mu_t_dot",
                                   "nu_phi_value", "nu_phi_dot", "nu_t_value", "nu_t_dot",
                                   "dirichlet_1_left", "dirichlet_1_right",
                                   "dirichlet_2_left", "dirichlet_2_right"};
  std::ofstream mout(out / "multipliers.csv");
  mout << "family,index,value\n";
  for (const char* fam : families) {
    const Eigen::VectorXd v = sol.multiplier(fam);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      mout << fam << "," << i << "," << format_g17(v(i)) << "\n";
  }
  mout.close();

  if (cs) {
    std::vector<std::vector<double>> crows;
    for (int k = 0; k < cfg.n_tau; ++k)
      crows.push_back({static_cast<double>(k), gt.coord(k), cs->values(k),
                       cs->values(k) - cs->initial_value});
    write_csv(out / "charge.csv", {"k", "tau", "Q", "deviation"}, crows);
  }

  json rep{{"schema_version", kSchemaVersion},
           {"solver", solver_json(sol.report)},
           {"causal", sol.causal},
           {"invariants", invariants},
           {"timing_seconds", secs}};
  if (cs) {
    rep["charge_initial"] = cs->initial_value;
    rep["charge_max_abs_deviation"] = cs->max_abs_deviation;
    rep["charge_endpoint_term_initial"] = cs->endpoint_term_initial;
    rep["charge_endpoint_term_final"] = cs->endpoint_term_final;
  }
  write_json(out / "report.json", rep);
}

int cmd_wave(const WaveConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  const auto t0 = std::chrono::steady_clock::now();
  const FieldSolution sol = solve_wave(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json invariants = json::object();
  bool all_ok = true;
  const double pscale = 1.0 + sol.phi1.cwiseAbs().maxCoeff();
  const double tscale = 1.0 + sol.tmap1.cwiseAbs().maxCoeff();
  const double branch_phi = (sol.phi1 - sol.phi2).cwiseAbs().maxCoeff() / pscale;
  const double branch_t = (sol.tmap1 - sol.tmap2).cwiseAbs().maxCoeff() / tscale;
  invariants["branch_symmetry_phi"] = branch_phi;
  invariants["branch_symmetry_t"] = branch_t;
  invariants["branch_symmetry_ok"] = branch_phi <= 1e-7 && branch_t <= 1e-7;
  invariants["causal"] = sol.causal;
  all_ok = all_ok && sol.causal && branch_phi <= 1e-7 && branch_t <= 1e-7;

  const ChargeSeries* csp = nullptr;
  ChargeSeries cs;
  if (sol.report.converged) {
    cs = charge_series(sol, cfg);
    csp = &cs;
    const bool ok = cs.max_abs_deviation <= 1e-8 * std::abs(cs.initial_value);
    invariants["charge_conservation_ok"] = ok;
    all_ok = all_ok && ok;
  }
  write_wave_bundle(cfg, sol, csp, secs, invariants, out);

  if (!sol.report.converged) {
    std::cerr << "wave: solver failed (" << sol.report.failure << ")\n";
    return 2;
  }
  if (!all_ok) {
    std::cerr << "wave: invariant violation (see report.json)\n";
    return 3;
  }
  return 0;
}

int cmd_noether(const fs::path& bundle, const fs::path& out) {
  std::ifstream cin_(bundle / "config.json");
  if (!cin_) {
    std::cerr << "noether: missing " << (bundle / "config.json") << "\n";
    return 1;
  }
  json jc;
  cin_ >> jc;
  const WaveConfig cfg = wave_config_from_json(jc);

  // rebuild the solution from the stored bundle
  const auto rows = read_csv(bundle / "fields.csv");
  FieldSolution sol;
  sol.config = cfg;
  sol.phi1 = sol.phi2 = sol.tmap1 = sol.tmap2 = Field::Zero(cfg.n_tau, cfg.n_sigma);
  for (const auto& r : rows) {
    const int k = static_cast<int>(r[0]), j = static_cast<int>(r[1]);
    sol.phi1(k, j) = r[4];
    sol.phi2(k, j) = r[5];
    sol.tmap1(k, j) = r[6];
    sol.tmap2(k, j) = r[7];
  }
  wave_detail::Layout lay(cfg.n_tau, cfg.n_sigma);
  sol.raw = Eigen::VectorXd::Zero(lay.dim());
  sol.raw.segment(lay.offset[wave_detail::Layout::phi1], lay.nf) = flatten(sol.phi1);
  sol.raw.segment(lay.offset[wave_detail::Layout::phi2], lay.nf) = flatten(sol.phi2);
  sol.raw.segment(lay.offset[wave_detail::Layout::t1], lay.nf) = flatten(sol.tmap1);
  sol.raw.segment(lay.offset[wave_detail::Layout::t2], lay.nf) = flatten(sol.tmap2);

  static const std::pair<const char*, wave_detail::Layout::Seg> fam[] = {
      {"mu_phi_value", wave_detail::Layout::mu_pv}, {"mu_phi_dot", wave_detail::Layout::mu_pd},
      {"mu_t_value", wave_detail::Layout::mu_tv},   {"mu_t_dot", wave_detail::Layout::mu_td},
      {"nu_phi_value", wave_detail::Layout::nu_pv}, {"nu_phi_dot", wave_detail::Layout::nu_pd},
      {"nu_t_value", wave_detail::Layout::nu_tv},   {"nu_t_dot", wave_detail::Layout::nu_td},
      {"dirichlet_1_left", wave_detail::Layout::r1l},
      {"dirichlet_1_right", wave_detail::Layout::r1r},
      {"dirichlet_2_left", wave_detail::Layout::r2l},
      {"dirichlet_2_right", wave_detail::Layout::r2r}};
  std::ifstream min_(bundle / "multipliers.csv");
  if (!min_) {
    std::cerr << "noether: missing " << (bundle / "multipliers.csv") << "\n";
    return 1;
  }
  std::string line;
  std::getline(min_, line);  // header
  while (std::getline(min_, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    const std::string name = line.substr(0, c1);
    const int idx = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
    const double val = std::stod(line.substr(c2 + 1));
    for (const auto& [nm, seg] : fam)
      if (name == nm) sol.raw(lay.offset[seg] + idx) = val;
  }
  sol.report.converged = true;  // bundle invariants were checked when written

  const ChargeSeries cs = charge_series(sol, cfg);
  fs::create_directories(out);
  const Grid1D gt = cfg.grid_tau();
  std::vector<std::vector<double>> crows;
  for (int k = 0; k < cfg.n_tau; ++k)
    crows.push_back({static_cast<double>(k), gt.coord(k), cs.values(k),
                     cs.values(k) - cs.initial_value});
  write_csv(out / "charge.csv", {"k", "tau", "Q", "deviation"}, crows);
  write_json(out / "report.json", json{{"schema_version", kSchemaVersion},
                                       {"charge_initial", cs.initial_value},
                                       {"charge_max_abs_deviation", cs.max_abs_deviation}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational IBVP solvers on summation-by-parts operators"};
  app.require_subcommand(1);

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "eigenvalues of the (regularized) SBP derivative");
  std::string sp_order = "121", sp_out;
  int sp_n = 20;
  bool sp_reg = false, sp_unscaled = false, sp_dump = false;
  double sp_target = 0.0;
  sp->add_option("--order", sp_order, "SBP order tag (121 or 424)");
  sp->add_option("--n", sp_n, "grid points")->check(CLI::PositiveNumber);
  sp->add_flag("--regularized", sp_reg, "use the affine-regularized extended operator");
  sp->add_option("--target", sp_target, "boundary datum of the affine penalty");
  sp->add_flag("--unscaled", sp_unscaled, "report the dimensionful operator (default: dt-scaled)");
  sp->add_flag("--dump-operators", sp_dump, "also write h.csv, q.csv, d.csv");
  sp->add_option("--out", sp_out, "output directory");

  // particle
  auto* pa = app.add_subcommand("particle", "doubled point-mass initial-value solve");
  ParticleConfig pc;
  std::string pa_order = "121", pa_out;
  bool pa_noreg = false;
  pa->add_option("--mass", pc.mass);
  pa->add_option("--g", pc.g);
  pa->add_option("--x0", pc.x_init, "initial position");
  pa->add_option("--v0", pc.v_init, "initial velocity");
  pa->add_option("--t0", pc.t_init);
  pa->add_option("--t1", pc.t_final);
  pa->add_option("--nt", pc.n_t, "grid points");
  pa->add_option("--order", pa_order);
  pa->add_flag("--no-regularize", pa_noreg, "use the naive unregularized operators");
  pa->add_option("--tol", pc.grad_tolerance);
  pa->add_option("--max-iter", pc.max_iterations);
  bool pa_fd = false;
  pa->add_flag("--fd-jacobian", pa_fd, "finite-difference Jacobian instead of the analytic one");
  pa->add_option("--out", pa_out, "output directory");

  // converge
  auto* co = app.add_subcommand("converge", "particle grid-refinement study");
  ParticleConfig cc;
  std::string co_order = "121", co_out;
  std::vector<int> co_grids = {16, 32, 64, 128};
  bool co_noreg = false;
  co->add_option("--g", cc.g);
  co->add_option("--v0", cc.v_init);
  co->add_option("--order", co_order);
  co->add_flag("--no-regularize", co_noreg);
  co->add_option("--grids", co_grids, "grid sizes (at least 4, increasing)");
  co->add_option("--out", co_out, "output directory");

  // wave
  auto* wa = app.add_subcommand("wave", "doubled wave solve with a dynamical temporal map");
  std::string wa_config, wa_out;
  int wa_nt = -1, wa_ns = -1;
  double wa_tension = -1.0, wa_amp = -1e300, wa_tol = -1.0;
  wa->add_option("--config", wa_config, "JSON config file")->check(CLI::ExistingFile);
  wa->add_option("--nt", wa_nt, "override n_tau");
  wa->add_option("--ns", wa_ns, "override n_sigma");
  wa->add_option("--tension", wa_tension, "override T");
  wa->add_option("--amplitude", wa_amp, "override bump amplitude");
  wa->add_option("--tol", wa_tol, "override gradient tolerance");
  wa->add_option("--out", wa_out, "output directory");

  // noether
  auto* no = app.add_subcommand("noether", "charge series of a stored wave solution");
  std::string no_bundle, no_out;
  no->add_option("--solution", no_bundle, "wave output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  no->add_option("--out", no_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sp->parsed())
      return cmd_spectrum(sp_order, sp_n, sp_reg, sp_target, sp_unscaled, sp_dump,
                          resolve_out(sp_out));
    if (pa->parsed()) {
      pc.order = parse_order(pa_order);
      pc.regularized = !pa_noreg;
      return cmd_particle(pc, pa_fd, resolve_out(pa_out));
    }
    if (co->parsed()) {
      cc.order = parse_order(co_order);
      cc.regularized = !co_noreg;
      return cmd_converge(cc, co_grids, resolve_out(co_out));
    }
    if (wa->parsed()) {
      WaveConfig cfg;
      if (!wa_config.empty()) {
        std::ifstream in(wa_config);
        json j;
        in >> j;
        cfg = wave_config_from_json(j);
      }
      if (wa_nt > 0) cfg.n_tau = wa_nt;
      if (wa_ns > 0) cfg.n_sigma = wa_ns;
      if (wa_tension > 0) cfg.tension = wa_tension;
      if (wa_amp > -1e299) cfg.bump_amplitude = wa_amp;
      if (wa_tol > 0) cfg.grad_tolerance = wa_tol;
      return cmd_wave(cfg, resolve_out(wa_out));
    }
    if (no->parsed()) return cmd_noether(no_bundle, resolve_out(no_out));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
