#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <random>

#include "sbpact/newton.hpp"
#include "sbpact/particle.hpp"

using namespace sbpact;

namespace {

StationarityProblem quadratic_problem() {
  // 1/2 x^T A x - b^T x with SPD A
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0,
       1, 3, 1,
       0, 1, 5;
  Eigen::VectorXd b(3);
  b << 1, -2, 0.5;
  StationarityProblem p;
  p.dimension = 3;
  p.objective = [a, b](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
  p.gradient = [a, b](const Eigen::VectorXd& x) { return (a * x - b).eval(); };
  p.initial_guess = Eigen::VectorXd::Constant(3, 7.0);
  return p;
}

}  // namespace

TEST_CASE("Newton solves a quadratic in one step") {
  StationarityProblem p = quadratic_problem();
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 1, 0, 1, 5;
  Eigen::VectorXd b(3);
  b << 1, -2, 0.5;
  p.jacobian = [a](const Eigen::VectorXd&) { return a; };
  auto [x, rep] = solve_stationary(p);
  REQUIRE(rep.converged);
  REQUIRE(rep.iterations <= 1);
  REQUIRE(rep.final_grad_norm <= 1e-12);
  REQUIRE((x - a.lu().solve(b)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Newton with finite-difference Jacobian needs at most two steps on quadratics") {
  StationarityProblem p = quadratic_problem();
  auto [x, rep] = solve_stationary(p);
  REQUIRE(rep.converged);
  REQUIRE(rep.iterations <= 2);
}

TEST_CASE("KKT toy problem x^2 + lambda (x - 3)") {
  StationarityProblem p;
  p.dimension = 2;
  p.objective = [](const Eigen::VectorXd& u) { return u(0) * u(0) + u(1) * (u(0) - 3.0); };
  p.gradient = [](const Eigen::VectorXd& u) {
    Eigen::VectorXd g(2);
    g << 2.0 * u(0) + u(1), u(0) - 3.0;
    return g;
  };
  p.initial_guess = Eigen::VectorXd::Zero(2);
  auto [u, rep] = solve_stationary(p);
  REQUIRE(rep.converged);
  REQUIRE(u(0) == Catch::Approx(3.0).margin(1e-10));
  REQUIRE(u(1) == Catch::Approx(-6.0).margin(1e-10));
}

TEST_CASE("particle stationary point matches a direct linear solve") {
  ParticleConfig cfg;
  cfg.n_t = 8;
  StationarityProblem p = assemble_particle_action(cfg);

  // oracle: the gradient is linear, g(u) = M u - b; assemble M column-wise
  // from gradient evaluations and solve directly
  const int dim = p.dimension;
  const Eigen::VectorXd g0 = p.gradient(Eigen::VectorXd::Zero(dim));
  Eigen::MatrixXd m(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(j) = 1.0;
    m.col(j) = p.gradient(e) - g0;
  }
  const Eigen::VectorXd direct = m.lu().solve(-g0);

  auto [u, rep] = solve_stationary(p);
  REQUIRE(rep.converged);
  REQUIRE((u - direct).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("check_gradient on a quadratic and on a constant") {
  StationarityProblem p = quadratic_problem();
  Eigen::VectorXd x(3);
  x << 0.3, -1.0, 2.0;
  REQUIRE(check_gradient(p, x) <= 1e-8);

  StationarityProblem c;
  c.dimension = 2;
  c.objective = [](const Eigen::VectorXd&) { return 42.0; };
  c.gradient = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2).eval(); };
  c.initial_guess = Eigen::VectorXd::Zero(2);
  REQUIRE(check_gradient(c, Eigen::VectorXd::Ones(2)) == 0.0);
}

TEST_CASE("determinism: identical problems give bit-identical histories") {
  ParticleConfig cfg;
  cfg.n_t = 16;
  auto t1 = solve_particle(cfg);
  auto t2 = solve_particle(cfg);
  REQUIRE(t1.report.residual_history.size() == t2.report.residual_history.size());
  for (std::size_t i = 0; i < t1.report.residual_history.size(); ++i)
    REQUIRE(t1.report.residual_history[i] == t2.report.residual_history[i]);
  REQUIRE((t1.x1 - t2.x1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stationary points are saddles: indefinite Jacobian at the particle solution") {
  ParticleConfig cfg;
  cfg.n_t = 8;
  StationarityProblem p = assemble_particle_action(cfg);
  auto [u, rep] = solve_stationary(p);
  REQUIRE(rep.converged);
  const Eigen::MatrixXd jac = p.jacobian(u);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (jac + jac.transpose()));
  REQUIRE(es.eigenvalues().minCoeff() < -1e-8);
  REQUIRE(es.eigenvalues().maxCoeff() > 1e-8);
}

TEST_CASE("max-iterations failure is reported") {
  StationarityProblem p;
  p.dimension = 1;
  // gradient never vanishes
  p.objective = [](const Eigen::VectorXd& x) { return std::exp(x(0)); };
  p.gradient = [](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, std::exp(x(0))).eval();
  };
  p.initial_guess = Eigen::VectorXd::Zero(1);
  p.max_iterations = 5;
  auto [x, rep] = solve_stationary(p);
  REQUIRE_FALSE(rep.converged);
  REQUIRE((rep.failure == "max_iterations" || !rep.failure.empty()));
}

TEST_CASE("non-finite gradient is reported") {
  StationarityProblem p;
  p.dimension = 1;
  p.objective = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); };
  p.gradient = [](const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::quiet_NaN()).eval();
  };
  p.initial_guess = Eigen::VectorXd::Zero(1);
  auto [x, rep] = solve_stationary(p);
  REQUIRE_FALSE(rep.converged);
  REQUIRE(rep.failure == "non_finite_gradient");
}

TEST_CASE("singular Jacobian at a gradient-flat point is reported") {
  // g(x) = (x0 - x1 + 1, x1 - x0 + 1): J singular, no solution exists
  StationarityProblem p;
  p.dimension = 2;
  p.objective = [](const Eigen::VectorXd& x) {
    return 0.5 * (x(0) - x(1)) * (x(0) - x(1)) + x(0) + x(1);
  };
  p.gradient = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(2);
    g << x(0) - x(1) + 1.0, x(1) - x(0) + 1.0;
    return g;
  };
  p.initial_guess = Eigen::VectorXd::Zero(2);
  p.max_iterations = 30;
  auto [x, rep] = solve_stationary(p);
  REQUIRE_FALSE(rep.converged);
  REQUIRE_FALSE(rep.failure.empty());
}

TEST_CASE("problem validation") {
  StationarityProblem p;
  p.dimension = 0;
  REQUIRE_THROWS_AS(solve_stationary(p), std::invalid_argument);
  p.dimension = 2;
  p.gradient = [](const Eigen::VectorXd& x) { return x; };
  p.initial_guess = Eigen::VectorXd::Zero(3);
  REQUIRE_THROWS_AS(solve_stationary(p), std::invalid_argument);
}
