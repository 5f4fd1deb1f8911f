#include <doctest.h>

#include <cmath>

#include "golden.hpp"
#include "kpn/error.hpp"
#include "kpn/polyspace.hpp"

using namespace kpn;

TEST_SUITE("polyspace") {
  TEST_CASE("multi-index enumeration") {
    CHECK(enumerate_multi_indices(2, 1) == std::vector<MultiIndex>{{0, 0}, {0, 1}, {1, 0}});
    CHECK(enumerate_multi_indices(1, 3) == std::vector<MultiIndex>{{0}, {1}, {2}, {3}});
    CHECK(enumerate_multi_indices(3, -1).empty());
    CHECK(enumerate_multi_indices(3, 2).size() == 10);
    CHECK(multi_index_from_string(to_string(MultiIndex{2, 0, 1})) == MultiIndex{2, 0, 1});
  }

  TEST_CASE("Taylor monomials") {
    const double a[] = {7.0, -2.0};
    const double b[] = {3.0, 5.0};
    CHECK(monomial_eval({0, 0}, a) == 1.0);
    CHECK(monomial_eval({2, 0}, b) == doctest::Approx(4.5));
    CHECK(monomial_eval({1, 1}, b) == doctest::Approx(15.0));
  }

  TEST_CASE("spectral bump") {
    CHECK(kappa_hat(0.3, 0.5) == 1.0);
    CHECK(kappa_hat(1.7, 0.5) == 0.0);
    CHECK(kappa_hat(0.75, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    for (double w = 0.0; w < 1.2; w += 0.01) {
      CHECK(kappa_hat(w) >= 0.0);
      CHECK(kappa_hat(w) <= 1.0);
    }
  }

  TEST_CASE("1D duals") {
    const PolyCorrector c = build_corrector(1, 3);
    CHECK(c.imag_residue() <= 1e-10);
    const Eigen::MatrixXd G = c.gram();
    CHECK((G - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(c.dual(0).integrate() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(c.dual(1).integrate()) <= 1e-9);
    // odd count puts x = 0 on a node
    const PolyCorrector odd = build_corrector(1, 0, CorrectorGrid{0.5, 1200.0, 4097});
    const std::size_t mid = odd.dual(0).size() / 2;
    CHECK(odd.dual(0)[mid] == doctest::Approx(golden()["kappa_1d_origin"].get<double>()).epsilon(1e-9));
  }

  TEST_CASE("2D projector") {
    const PolyCorrector c = build_corrector(2, 1);
    const auto& basis = c.basis();
    REQUIRE(basis.size() == 3);
    SUBCASE("reproduces a basis monomial") {
      PolyCoeffs p(2, 1);
      p.set_coefficient({1, 0}, 1.0);
      const PolyCoeffs back = project_poly(c, sample_poly(p, c.axes()));
      CHECK(std::abs(back.coefficient({0, 0})) <= 1e-6);
      CHECK(back.coefficient({1, 0}) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::abs(back.coefficient({0, 1})) <= 1e-6);
    }
    SUBCASE("zero maps to zero") {
      const PolyCoeffs back = project_poly(c, GridFunction(c.axes()));
      CHECK(back.coeffs().cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("idempotent") {
      const GridFunction f = GridFunction::sample(c.axes(), [](std::span<const double> x) {
        return std::exp(-0.01 * (x[0] * x[0] + x[1] * x[1])) + 0.3 * x[0];
      });
      const PolyCoeffs p1 = project_poly(c, f);
      const PolyCoeffs p2 = project_poly(c, sample_poly(p1, c.axes()));
      CHECK((p1.coeffs() - p2.coeffs()).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(build_corrector(4, 1), ConfigError);
    CHECK_THROWS_AS(build_corrector(1, 4), ConfigError);
    CHECK_THROWS_AS(build_corrector(1, 2, CorrectorGrid{0.5, 5.0, 64}), ConfigError);
    CHECK_THROWS_AS(build_corrector(1, 2, CorrectorGrid{0.5, 1000.0, 64}), ConfigError);
  }

  TEST_CASE("coefficient json") {
    PolyCoeffs p(2, 2);
    p.set_coefficient({1, 1}, -0.25);
    p.set_coefficient({0, 0}, 3.0);
    nlohmann::json j = p;
    const PolyCoeffs q = poly_from_json(j, 2);
    CHECK(q.coeffs() == p.coeffs());
    CHECK(q.degree() == 2);
  }
}
