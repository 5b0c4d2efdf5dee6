#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sbpact/noether.hpp"
#include "sbpact/wave.hpp"

using namespace sbpact;

namespace {
WaveConfig test_cfg(int nt, int ns) {
  WaveConfig cfg;
  cfg.n_tau = nt;
  cfg.n_sigma = ns;
  cfg.bump_width = 0.1;
  return cfg;
}
Field random_field(int nt, int ns, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Field f(nt, ns);
  for (int k = 0; k < nt; ++k)
    for (int j = 0; j < ns; ++j) f(k, j) = uni(rng);
  return f;
}
}  // namespace

TEST_CASE("charge density closed forms") {
  const int nt = 4, ns = 3;
  SECTION("vacuum: density equals the map rate") {
    const Field zero = Field::Zero(nt, ns);
    const Field td = Field::Constant(nt, ns, 1.05);
    const Field d = charge_density(zero, zero, td, zero, 1e4);
    REQUIRE((d.array() - 1.05).abs().maxCoeff() == 0.0);
  }
  SECTION("left-mover pattern phi_dot = phi_prime, t' = 0") {
    const Field pp = random_field(nt, ns, 1);
    const Field td = Field::Constant(nt, ns, 2.0);
    const Field d = charge_density(pp, pp, td, Field::Zero(nt, ns), 10.0);
    const Field expected = (td.array() * (1.0 + pp.array().square() / 10.0)).matrix();
    REQUIRE((d - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("shape mismatch") {
    REQUIRE_THROWS_AS(charge_density(Field::Zero(2, 2), Field::Zero(2, 3), Field::Zero(2, 2),
                                     Field::Zero(2, 2), 1.0),
                      std::invalid_argument);
  }
}

TEST_CASE("charge density is the tdot-derivative of the action density") {
  // finite-difference check of d(density)/d(tdot) at random arrays
  const int nt = 5, ns = 5;
  const double tension = 1e4;
  const Field pd = random_field(nt, ns, 2), pp = random_field(nt, ns, 3),
              td = random_field(nt, ns, 4), tp = random_field(nt, ns, 5);
  const Field dens = charge_density(pd, pp, td, tp, tension);
  auto action_density = [&](const Field& tdd) {
    return (0.5 * (tdd.array().square() +
                   (1.0 / tension) * (pd.array().square() * (tp.array().square() - 1.0) -
                                      2.0 * pd.array() * pp.array() * tdd.array() * tp.array() +
                                      pp.array().square() * tdd.array().square())))
        .matrix();
  };
  const double h = 1e-6;
  Field fd(nt, ns);
  for (int k = 0; k < nt; ++k)
    for (int j = 0; j < ns; ++j) {
      Field tp_ = td, tm_ = td;
      tp_(k, j) += h;
      tm_(k, j) -= h;
      fd(k, j) = (action_density(tp_)(k, j) - action_density(tm_)(k, j)) / (2.0 * h);
    }
  REQUIRE((dens - fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("vacuum charge equals dt0 times the sigma weight sum, exactly flat") {
  WaveConfig cfg = test_cfg(9, 7);
  cfg.bump_amplitude = 0.0;
  const FieldSolution sol = solve_wave(cfg);
  REQUIRE(sol.report.converged);
  const ChargeSeries cs = charge_series(sol, cfg);
  const double width = cfg.sigma_max - cfg.sigma_min;
  REQUIRE(cs.initial_value == Catch::Approx(cfg.dt0 * width).margin(1e-12));
  REQUIRE(cs.max_abs_deviation < 1e-13);
  REQUIRE(std::abs(cs.endpoint_term_initial) < 1e-13);
  REQUIRE(std::abs(cs.endpoint_term_final) < 1e-13);
}

TEST_CASE("bump run: charge exactly conserved, deviation tracks non-stationarity") {
  WaveConfig cfg = test_cfg(15, 12);
  FieldSolution sol = solve_wave(cfg);
  REQUIRE(sol.report.converged);
  const ChargeSeries cs = charge_series(sol, cfg);
  REQUIRE(cs.max_abs_deviation <= 1e-8 * std::abs(cs.initial_value));
  // the final-slice endpoint term is genuinely active on bump runs
  REQUIRE(std::abs(cs.endpoint_term_final) > 1e-6);

  // conservation is a property of stationarity: perturbing the solution off
  // the stationary point breaks it linearly in the perturbation size
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd dir(sol.raw.size());
  for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = uni(rng);
  auto deviation_at = [&](double eps) {
    FieldSolution p = sol;
    p.raw = sol.raw + eps * dir;
    p.tmap1 = unflatten(p.raw.segment(2 * cfg.n_tau * cfg.n_sigma, cfg.n_tau * cfg.n_sigma),
                        cfg.n_tau, cfg.n_sigma);
    p.phi1 = unflatten(p.raw.head(cfg.n_tau * cfg.n_sigma), cfg.n_tau, cfg.n_sigma);
    return charge_series(p, cfg).max_abs_deviation;
  };
  const double d6 = deviation_at(1e-6);
  const double d8 = deviation_at(1e-8);
  REQUIRE(d8 < d6 / 10.0);
  REQUIRE(d6 / d8 == Catch::Approx(100.0).epsilon(0.2));
}

TEST_CASE("charge_series rejects unconverged input") {
  WaveConfig cfg = test_cfg(7, 5);
  FieldSolution sol = solve_wave_fixed_map(cfg);
  sol.report.converged = false;
  REQUIRE_THROWS_AS(charge_series(sol, cfg), std::invalid_argument);
}

TEST_CASE("refinement balance: vacuum is flat with undefined correlation") {
  WaveConfig cfg = test_cfg(9, 7);
  cfg.bump_amplitude = 0.0;
  const FieldSolution sol = solve_wave(cfg);
  const RefinementBalance rb = refinement_balance(sol, cfg);
  REQUIRE_FALSE(rb.correlation_defined);
  REQUIRE((rb.series.array() - rb.series(0)).abs().maxCoeff() < 1e-12);
  REQUIRE(rb.series(0) == Catch::Approx(cfg.dt0 * (cfg.sigma_max - cfg.sigma_min)).margin(1e-12));
}

TEST_CASE("refinement balance: bump run correlation is negative") {
  WaveConfig cfg = test_cfg(20, 16);
  const FieldSolution sol = solve_wave(cfg);
  REQUIRE(sol.report.converged);
  const RefinementBalance rb = refinement_balance(sol, cfg);
  REQUIRE(rb.correlation_defined);
  REQUIRE(rb.correlation < 0.0);
}

TEST_CASE("synthetic right-mover with enforced constant charge") {
  // build arrays satisfying sum_j hsig_j (td + (phi')^2 (td + tp)/T) = const
  // by construction: tp = 0 and td = C / (1 + (phi')^2 / T) pointwise has no
  // closed constant sum, so instead scale td so each slice integrates to C
  WaveConfig cfg = test_cfg(8, 10);
  wave_detail::Operators ops(cfg);
  const int nt = cfg.n_tau, ns = cfg.n_sigma;
  Field pp = random_field(nt, ns, 7);
  Field tp = Field::Zero(nt, ns);
  Field td(nt, ns);
  const double target = 1.3;
  for (int k = 0; k < nt; ++k) {
    double denom = 0.0;
    for (int j = 0; j < ns; ++j)
      denom += ops.sigma.h(j) * (1.0 + pp(k, j) * pp(k, j) / cfg.tension);
    td.row(k).setConstant(target / denom);
  }
  const double it = 1.0 / cfg.tension;
  Eigen::VectorXd series(nt);
  for (int k = 0; k < nt; ++k) {
    double s = 0.0;
    for (int j = 0; j < ns; ++j)
      s += ops.sigma.h(j) *
           (td(k, j) + it * pp(k, j) * pp(k, j) * (td(k, j) + tp(k, j)));
    series(k) = s;
  }
  REQUIRE((series.array() - target).abs().maxCoeff() < 1e-10);
}
