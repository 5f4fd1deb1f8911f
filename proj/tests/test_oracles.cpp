#include <doctest.h>

#include <cmath>
#include <random>

#include "kpn/error.hpp"
#include "kpn/oracles.hpp"
#include "kpn/solver.hpp"

using namespace kpn;

TEST_SUITE("oracles") {
  TEST_CASE("polyharmonic reproduces polynomials") {
    Eigen::MatrixXd X6(6, 1);
    X6 << -1.0, -0.4, 0.1, 0.5, 0.9, 1.3;
    Eigen::VectorXd y6(6);
    for (int i = 0; i < 6; ++i) y6[i] = 1.0 - X6(i, 0) + 0.5 * X6(i, 0) * X6(i, 0);
    const PolyharmonicFit f1 = polyharmonic_interpolate(X6, y6, 3.0);
    CHECK(f1.a.cwiseAbs().maxCoeff() <= 1e-8);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X20(20, 2);
    for (auto& x : X20.reshaped()) x = n01(rng);
    Eigen::VectorXd yq(20);
    for (int i = 0; i < 20; ++i) yq[i] = 1.0 + 2.0 * X20(i, 0) - X20(i, 1) + X20(i, 0) * X20(i, 1);
    const PolyharmonicFit f2 = polyharmonic_interpolate(X20, yq, 4.0);
    CHECK(f2.a.cwiseAbs().maxCoeff() <= 1e-8);
    const double x0[] = {0.3, -0.7};
    CHECK(polyharmonic_eval(f2, X20, 4.0, x0) == doctest::Approx(1.0 + 0.6 + 0.7 - 0.21).epsilon(1e-8));

    // M = dim P (cubics in 2D): the polynomial block alone interpolates.
    Eigen::MatrixXd X10(10, 2);
    for (auto& x : X10.reshaped()) x = n01(rng);
    Eigen::VectorXd yc(10);
    for (int i = 0; i < 10; ++i) yc[i] = X10(i, 0) * X10(i, 0) * X10(i, 1) - 2.0 * X10(i, 1) + 0.5;
    const PolyharmonicFit f3 = polyharmonic_interpolate(X10, yc, 4.0);
    CHECK(f3.a.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(f3.b.coefficient({2, 1}) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(f3.b.coefficient({0, 1}) == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(f3.b.coefficient({0, 0}) == doctest::Approx(0.5).epsilon(1e-8));
  }

  TEST_CASE("polyharmonic interpolates") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(20, 2);
    Eigen::VectorXd y(20);
    for (auto& x : X.reshaped()) x = n01(rng);
    for (auto& v : y) v = n01(rng);
    const PolyharmonicFit f = polyharmonic_interpolate(X, y, 4.0);
    CHECK(f.interpolation_residual <= 1e-8);
    CHECK(f.side_residual <= 1e-8);
    for (int i = 0; i < 20; ++i) {
      const double xi[] = {X(i, 0), X(i, 1)};
      CHECK(polyharmonic_eval(f, X, 4.0, xi) == doctest::Approx(y[i]).epsilon(1e-8));
    }
    Eigen::MatrixXd dup = X;
    dup.row(1) = dup.row(0);
    CHECK_THROWS_AS(polyharmonic_interpolate(dup, y, 4.0), NumericalError);
  }

  TEST_CASE("grid-knot optimum") {
    const Eigen::VectorXd x = (Eigen::VectorXd(6) << -1.0, -0.5, 0.0, 0.2, 0.6, 1.0).finished();
    const Eigen::VectorXd y = (Eigen::VectorXd(6) << 0.3, -0.2, 0.5, 0.1, -0.4, 0.2).finished();
    SUBCASE("huge lambda is polynomial least squares") {
      const GridKnotResult r = grid_knot_optimum_1d(x, y, 1e8, 200);
      Eigen::MatrixXd P(6, 2);
      P.col(0).setOnes();
      P.col(1) = x;
      const Eigen::VectorXd c = P.colPivHouseholderQr().solve(y);
      CHECK(r.objective == doctest::Approx((y - P * c).squaredNorm()).epsilon(1e-12));
    }
    SUBCASE("two points are interpolated") {
      const Eigen::VectorXd x2 = (Eigen::VectorXd(2) << -0.3, 0.4).finished();
      const Eigen::VectorXd y2 = (Eigen::VectorXd(2) << 1.0, -2.0).finished();
      CHECK(grid_knot_optimum_1d(x2, y2, 1e-9, 100).objective <= 1e-8);
    }
    SUBCASE("nested refinement does not increase the optimum") {
      const double coarse = grid_knot_optimum_1d(x, y, 0.05, 500).objective;
      const double fine = grid_knot_optimum_1d(x, y, 0.05, 999).objective;
      CHECK(fine <= coarse * (1 + 1e-12));
    }
  }

  TEST_CASE("sparsity certificate") {
    const OperatorSpec s21{OperatorFamily::fractional_laplacian, 2.0, 2, 1};
    Model m = Model::empty(s21);
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 0.0;
    for (int i = 0; i < 7; ++i) m.atoms.push_back({1.0, A, Eigen::VectorXd::Constant(1, double(i))});
    auto c = sparsity_certificate(m, 10);
    CHECK(c.ok);
    CHECK(c.bound == 7);
    m.atoms.push_back({1.0, A, Eigen::VectorXd::Constant(1, 9.0)});
    CHECK_FALSE(sparsity_certificate(m, 10).ok);
    const OperatorSpec s10{OperatorFamily::fractional_laplacian, 0.5, 1, 0};
    CHECK(sparsity_certificate(Model::empty(s10), 10).bound == 9);  // n_L = 0
  }
}
