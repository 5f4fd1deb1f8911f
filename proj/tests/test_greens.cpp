#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "golden.hpp"
#include "kpn/error.hpp"
#include "kpn/greens.hpp"
#include "kpn/polyspace.hpp"
#include "kpn/stiefel.hpp"

using namespace kpn;
using std::numbers::pi;

TEST_SUITE("greens") {
  TEST_CASE("constants and branches") {
    const auto& g = golden()["constants"];
    auto c = greens_constant(2.0, 1);
    CHECK(c.branch == GreensBranch::power);
    CHECK(c.constant == doctest::Approx(g["A_2_1"].get<double>()).epsilon(1e-14));
    c = greens_constant(4.0, 2);
    CHECK(c.branch == GreensBranch::power_log);
    CHECK(c.m_prime == 1);
    CHECK(c.constant == doctest::Approx(g["B_1_2"].get<double>()).epsilon(1e-12));
    c = greens_constant(3.0, 2);
    CHECK(c.branch == GreensBranch::power);
    CHECK(c.constant == doctest::Approx(g["A_3_2"].get<double>()).epsilon(1e-14));
    c = greens_constant(3.0, 1);
    CHECK(c.branch == GreensBranch::power_log);
    CHECK(c.constant == doctest::Approx(g["B_1_1"].get<double>()).epsilon(1e-12));
    CHECK(greens_constant(4.0, 1).constant == doctest::Approx(g["A_4_1"].get<double>()).epsilon(1e-14));
    CHECK_THROWS_AS(greens_constant(2.0, 2), DomainError);
  }

  TEST_CASE("rho values") {
    const double t1[] = {4.0};
    CHECK(rho(make_profile(2.0, 1), t1) == doctest::Approx(-2.0).epsilon(1e-15));
    const double t2[] = {3.0, 4.0};
    CHECK(rho(make_profile(3.0, 2), t2) == doctest::Approx(-5.0 / (2 * pi)).epsilon(1e-15));
    const double z[] = {0.0, 0.0};
    CHECK(rho(make_profile(4.0, 2), z) == 0.0);
    CHECK(rho(make_profile(3.0, 2), z) == 0.0);
  }

  TEST_CASE("gradient scale matches finite differences") {
    for (auto [alpha, m] : {std::pair{2.5, 1}, std::pair{3.0, 1}, std::pair{4.0, 2}, std::pair{3.5, 2}}) {
      const GreensProfile p = make_profile(alpha, m);
      const double r = 1.3, h = 1e-6;
      const double fd = (rho_radial(p, r + h) - rho_radial(p, r - h)) / (2 * h);
      CHECK(rho_gradient_scale(p, r) * r == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  TEST_CASE("weak identity on default grids") {
    CHECK(weak_identity_residual_default(make_profile(2.0, 1)) <= 1e-3);
    CHECK(weak_identity_residual_default(make_profile(4.0, 2)) <= 1e-2);
  }

  TEST_CASE("weak identity detects a wrong constant") {
    GreensProfile p = make_profile(2.0, 1);
    p.constant *= 2.0;
    const auto axes = default_weak_identity_axes(1);
    const TestFunction tf = gaussian_test_function(1, axes, default_test_laplacian_power(2.0));
    const double r = weak_identity_residual(p, tf.samples, tf.value_at_origin);
    CHECK(r == doctest::Approx(std::abs(tf.value_at_origin)).epsilon(0.1));
  }

  TEST_CASE("weak identity rejects a truncated test function") {
    const GreensProfile p = make_profile(2.0, 1);
    const auto axes = uniform_axes(1, 256, 3.0);
    const TestFunction tf = gaussian_test_function(1, axes, 0);
    CHECK_THROWS_AS(weak_identity_residual(p, tf.samples, tf.value_at_origin), ConfigError);
  }

  TEST_CASE("activation aliases") {
    CHECK_NOTHROW(check_alias(make_profile(2.0, 1), ActivationAlias::relu));
    CHECK_THROWS_AS(check_alias(make_profile(4.0, 2), ActivationAlias::relu), DomainError);
    CHECK_NOTHROW(check_alias(make_profile(3.0, 2), ActivationAlias::norm));
  }

  TEST_CASE("kernel_g") {
    const OperatorSpec spec{OperatorFamily::fractional_laplacian, 2.0, 2, 1};
    const auto ridge = std::make_shared<const PolyCorrector>(build_corrector(1, 1, CorrectorGrid::ridge_defaults(1)));
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 0.0;
    const Eigen::VectorXd t = Eigen::VectorXd::Zero(1);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);
    SUBCASE("golden value at the origin") {
      CHECK(kernel_g(spec, A, t, x0, *ridge) ==
            doctest::Approx(golden()["kernel_g_d2_k1_a2_origin"].get<double>()).epsilon(1e-6));
    }
    SUBCASE("no correction for n_L = -1") {
      const GKernel plain(make_profile(2.0, 1), 2, std::make_shared<const PolyCorrector>(build_corrector(1, -1)));
      const Eigen::VectorXd x = Eigen::Vector2d(0.7, -2.0);
      const double u[] = {0.7};
      CHECK(plain(A, t, x) == rho(make_profile(2.0, 1), u));
    }
    SUBCASE("growth bound is stable") {
      const GKernel g(make_profile(2.0, 1), 2, ridge);
      std::normal_distribution<double> n01;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      auto sup = [&](double radius) {
        double worst = 0.0;
        std::mt19937_64 local(5);
        for (int i = 0; i < 1000; ++i) {
          const Eigen::MatrixXd Ai = random_stiefel(1, 2, local());
          const Eigen::VectorXd ti = Eigen::VectorXd::Constant(1, n01(local));
          Eigen::VectorXd x = Eigen::Vector2d(n01(local), n01(local));
          x *= radius * unit(local) / x.norm();
          worst = std::max(worst, std::abs(g(Ai, ti, x)) / (1.0 + x.norm()));
        }
        return worst;
      };
      const double s1 = sup(1e3), s2 = sup(2e3);
      CHECK(std::isfinite(s1));
      CHECK(s2 <= 1.05 * s1);
    }
  }
}
