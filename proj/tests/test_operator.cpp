#include <doctest.h>

#include <cmath>
#include <numbers>

#include "golden.hpp"
#include "kpn/error.hpp"
#include "kpn/operator.hpp"

using namespace kpn;
using std::numbers::pi;

TEST_SUITE("operator") {
  TEST_CASE("admissibility") {
    auto r = check_admissibility({OperatorFamily::fractional_laplacian, 2.0, 2, 1});
    CHECK(r.ok);
    CHECK(r.n_L == 1);
    CHECK(r.gamma_L == 2.0);

    r = check_admissibility({OperatorFamily::fractional_laplacian, 2.0, 3, 0});
    CHECK_FALSE(r.ok);
    CHECK_FALSE(r.messages.empty());

    r = check_admissibility({OperatorFamily::fractional_laplacian, 4.0, 2, 0});
    CHECK(r.ok);
    CHECK(r.n_L == 3);
    CHECK(r.gamma_L == 4.0);
  }

  TEST_CASE("n_L brackets gamma_L") {
    for (double alpha : {1.5, 2.0, 2.5, 3.0, 4.0, 4.2}) {
      const OperatorSpec s{OperatorFamily::fractional_laplacian, alpha, 3, 2};
      CHECK(s.gamma_L() > s.n_L());
      CHECK(s.gamma_L() <= s.n_L() + 1);
    }
  }

  TEST_CASE("radial symbol") {
    CHECK(radial_symbol({OperatorFamily::fractional_laplacian, 2.0, 2, 1}, 0.0) == 0.0);
    CHECK(radial_symbol({OperatorFamily::fractional_laplacian, 2.0, 2, 1}, 3.0) == doctest::Approx(9.0).epsilon(1e-15));
    CHECK(radial_symbol({OperatorFamily::fractional_laplacian, 3.0, 2, 1}, 2.0) == doctest::Approx(8.0).epsilon(1e-15));
  }

  TEST_CASE("sphere areas") {
    const auto& g = golden()["constants"];
    CHECK(sphere_area(1) == doctest::Approx(g["S0_area"].get<double>()).epsilon(1e-14));
    CHECK(sphere_area(2) == doctest::Approx(g["S1_area"].get<double>()).epsilon(1e-14));
    CHECK(sphere_area(3) == doctest::Approx(g["S2_area"].get<double>()).epsilon(1e-14));
  }

  TEST_CASE("backprojection constants") {
    const auto& g = golden()["constants"];
    CHECK(backprojection_constant(2, 1) == doctest::Approx(g["c_2_1"].get<double>()).epsilon(1e-14));
    CHECK(backprojection_constant(3, 2) == doctest::Approx(g["c_3_2"].get<double>()).epsilon(1e-14));
    CHECK(backprojection_constant(3, 1) == doctest::Approx(g["c_3_1"].get<double>()).epsilon(1e-14));
    CHECK(backprojection_constant(2, 1) == doctest::Approx(1.0 / (4 * pi)).epsilon(1e-14));
    CHECK(backprojection_constant(3, 0) == 1.0);
    CHECK_THROWS_AS(backprojection_constant(2, 2), DomainError);
  }

  TEST_CASE("null space dimension") {
    CHECK(null_space_dim(2, 1) == 3);
    CHECK(null_space_dim(2, 3) == 10);
    CHECK(null_space_dim(5, -1) == 0);
  }

  TEST_CASE("json round trip") {
    const OperatorSpec s{OperatorFamily::fractional_laplacian, 3.5, 3, 1};
    nlohmann::json j = s;
    CHECK(j.get<OperatorSpec>() == s);
    j["family"] = "laplace_beltrami";
    CHECK_THROWS_AS(j.get<OperatorSpec>(), Error);
  }
}
