#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sbpact/affine.hpp"
#include "sbpact/spectral.hpp"

using namespace sbpact;

TEST_CASE("extended matrix reproduces the reference display at n=4") {
  const SbpPair p = build_sbp(SbpOrder::d121, Grid1D{4, 1.0, 0.0});
  const double xi = 0.7;
  const AffineOperator a = regularize(p, 0, xi);
  const Eigen::MatrixXd e = extended_matrix(a);
  // first row (1, 1, 0, 0 | -2 xi), bottom row (0,0,0,0 | 1)
  Eigen::RowVectorXd row0(5);
  row0 << 1.0, 1.0, 0.0, 0.0, -2.0 * xi;
  REQUIRE((e.row(0) - row0).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE(e.row(4).head(4).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(e(4, 4) == 1.0);
  REQUIRE(e(1, 0) == -0.5);
  REQUIRE(e(3, 3) == 1.0);
}

TEST_CASE("penalty vanishes when the datum is met") {
  const SbpPair p = build_sbp(SbpOrder::d121, make_grid(0.0, 1.0, 8));
  const double target = 0.3;
  const AffineOperator a = regularize(p, 0, target);
  Eigen::VectorXd x(8);
  x << target, -0.1, 0.4, 0.2, -0.8, 0.05, 0.6, -0.3;
  REQUIRE((apply_affine(a, x) - p.d * x).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("constant vector with matching target maps to zero") {
  const SbpPair p = build_sbp(SbpOrder::d121, make_grid(0.0, 1.0, 6));
  const double c = -1.7;
  const AffineOperator a = regularize(p, 0, c);
  REQUIRE(apply_affine(a, Eigen::VectorXd::Constant(6, c)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("operational and extended application paths agree") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const SbpPair p = build_sbp(SbpOrder::d121, Grid1D{4, 1.0, 0.0});
  const AffineOperator a = regularize(p, 0, 0.42);
  const Eigen::MatrixXd e = extended_matrix(a);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = uni(rng);
    Eigen::VectorXd x1(5);
    x1 << x, 1.0;
    const Eigen::VectorXd via_ext = (e * x1).head(4);
    REQUIRE((apply_affine(a, x) - via_ext).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("right-endpoint penalty and zero-offset reduction") {
  const SbpPair p = build_sbp(SbpOrder::d121, make_grid(0.0, 1.0, 5));
  const AffineOperator a = regularize(p, 4, 0.0);
  REQUIRE(a.offset.cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd x(5);
  x << 1, 2, 0, -1, 3;
  REQUIRE((apply_affine(a, x) - a.homogeneous * x).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE_THROWS_AS(regularize(p, 2, 0.0), std::invalid_argument);
}

TEST_CASE("extended spectrum is the homogeneous spectrum plus one") {
  const SbpPair p = build_sbp(SbpOrder::d121, make_grid(0.0, 1.0, 9));
  const AffineOperator a = regularize(p, 0, 0.25);
  const SpectrumReport full = spectrum(extended_matrix(a));
  const SpectrumReport homog = spectrum(p.grid.spacing * a.homogeneous);
  REQUIRE(full.has_unit_eigenvalue);
  // sorted multiset comparison: homog eigenvalues + {1}
  std::vector<std::complex<double>> expect(homog.eigenvalues.data(),
                                           homog.eigenvalues.data() + homog.eigenvalues.size());
  expect.emplace_back(1.0, 0.0);
  std::sort(expect.begin(), expect.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  REQUIRE(static_cast<std::size_t>(full.eigenvalues.size()) == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i)
    REQUIRE(std::abs(full.eigenvalues(static_cast<Eigen::Index>(i)) - expect[i]) < 1e-10);
}
