#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "golden.hpp"
#include "kpn/error.hpp"
#include "kpn/kplane.hpp"
#include "kpn/stiefel.hpp"

using namespace kpn;

namespace {

GridFunction gaussian(int d, int n, double extent, double cx = 0.0) {
  return GridFunction::sample(uniform_axes(d, n, extent), [cx](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - (a == 0 ? cx : 0.0)) * (x[a] - (a == 0 ? cx : 0.0));
    return std::exp(-0.5 * r2);
  });
}

}  // namespace

TEST_SUITE("kplane") {
  TEST_CASE("designs") {
    CHECK(DirectionDesign::half_circle(180).size() == 180);
    CHECK(DirectionDesign::full_circle(64).size() == 64);
    CHECK(DirectionDesign::sphere(40).size() == 40);
    CHECK(DirectionDesign::plane_frames(5).size() == 40);
    CHECK(DirectionDesign::signed_permutations(3).size() == 48);
    CHECK_THROWS_AS(DirectionDesign::full_circle(7), Error);
    Eigen::MatrixXd bad(1, 2);
    bad << 1.0, 0.1;
    CHECK_THROWS_AS(DirectionDesign(2, 1, {bad}, {1.0}), DomainError);
    const auto fc = DirectionDesign::full_circle(8);
    CHECK(fc.find(-fc.direction(1)) >= 0);
  }

  TEST_CASE("Gaussian plane integral") {
    const GridFunction phi = gaussian(2, 256, 6.5);
    const auto design = DirectionDesign::half_circle(12);
    const PlaneFunction R = kplane_transform(phi, design, default_t_axes(phi.axes(), 1));
    const double c = golden()["gaussian_plane_integral"].get<double>();
    double worst = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
      const GridFunction s = R.slice_function(i);
      std::vector<double> t(1);
      for (std::size_t j = 0; j < s.size(); ++j) {
        s.node(j, t);
        worst = std::max(worst, std::abs(s[j] - c * std::exp(-0.5 * t[0] * t[0])) / c);
      }
    }
    CHECK(worst <= 1e-3);
  }

  TEST_CASE("k = 0 reads the function at A^T t") {
    const GridFunction phi = gaussian(2, 33, 4.0, 0.5);
    const auto design = DirectionDesign::signed_permutations(2);
    const PlaneFunction R = kplane_transform(phi, design, phi.axes());
    double worst = 0.0;
    std::vector<double> t(2);
    for (std::size_t i = 0; i < design.size(); ++i) {
      const Eigen::MatrixXd& A = design.direction(i);
      const GridFunction s = R.slice_function(i);
      for (std::size_t j = 0; j < s.size(); ++j) {
        s.node(j, t);
        const Eigen::Vector2d x = A.transpose() * Eigen::Vector2d(t[0], t[1]);
        const double xs[] = {x[0], x[1]};
        worst = std::max(worst, std::abs(s[j] - phi.interpolate(xs)));
      }
    }
    CHECK(worst == 0.0);
  }

  TEST_CASE("linearity") {
    const GridFunction a = gaussian(2, 64, 6.0, 0.5);
    const GridFunction b = gaussian(2, 64, 6.0, -1.0);
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];
    const auto design = DirectionDesign::half_circle(16);
    const auto ta = default_t_axes(a.axes(), 1);
    const PlaneFunction Ra = kplane_transform(a, design, ta);
    const PlaneFunction Rb = kplane_transform(b, design, ta);
    const PlaneFunction Rm = kplane_transform(GridFunction(a.axes(), mix), design, ta);
    double worst = 0.0;
    for (std::size_t i = 0; i < Rm.values().size(); ++i) {
      worst = std::max(worst, std::abs(Rm.values()[i] - (2.0 * Ra.values()[i] - 0.5 * Rb.values()[i])));
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("backprojection of constants and adjointness") {
    const auto axes = uniform_axes(2, 65, 4.0);
    const auto design = DirectionDesign::half_circle(32);
    const auto ta = default_t_axes(axes, 1);
    PlaneFunction g(design, ta);
    for (double& v : g.values()) v = 2.5;
    const GridFunction b = backproject(g, axes);
    for (double v : b.values()) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));

    const GridFunction phi = gaussian(2, 65, 4.0, 0.3);
    PlaneFunction h(design, ta);
    for (std::size_t i = 0; i < design.size(); ++i) {
      const GridFunction s = GridFunction::sample(ta, [](std::span<const double> t) { return std::exp(-0.1 * t[0] * t[0]); });
      std::copy(s.values().begin(), s.values().end(), h.slice(i).begin());
    }
    const PlaneFunction R = kplane_transform(phi, design, ta);
    double lhs = 0.0;
    for (std::size_t i = 0; i < design.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < R.slice_size(); ++j) s += R.slice(i)[j] * h.slice(i)[j];
      lhs += design.weight(i) * s * ta[0].spacing();
    }
    const GridFunction Bh = backproject(h, axes);
    double rhs = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) rhs += phi[j] * Bh[j];
    rhs *= phi.cell_volume();
    CHECK(std::abs(lhs - rhs) <= 1e-3 * std::abs(rhs));
  }

  TEST_CASE("unfiltered backprojection of a radial input is radial") {
    const GridFunction phi = gaussian(2, 129, 6.0);
    const auto design = DirectionDesign::half_circle(64);
    const GridFunction b = backproject(kplane_transform(phi, design, default_t_axes(phi.axes(), 1)), phi.axes());
    const int n = 129;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        worst = std::max(worst, std::abs(b[i * n + j] - b[j * n + (n - 1 - i)]));
      }
    }
    CHECK(worst <= 1e-3 * b.max_abs());
  }

  TEST_CASE("filter") {
    const OperatorSpec s21{OperatorFamily::fractional_laplacian, 2.0, 2, 1};
    const auto design = DirectionDesign::half_circle(1);
    const std::vector<GridAxis> ta{{1025, 32.0}};
    SUBCASE("k = 0 scales by c_{d,0}") {
      const OperatorSpec s20{OperatorFamily::fractional_laplacian, 3.0, 2, 0};
      PlaneFunction g(DirectionDesign::signed_permutations(2), uniform_axes(2, 9, 1.0));
      for (std::size_t i = 0; i < g.values().size(); ++i) g.values()[i] = std::sin(double(i));
      const PlaneFunction f = filter_K(g, s20);
      for (std::size_t i = 0; i < g.values().size(); ++i) CHECK(f.values()[i] == g.values()[i]);
    }
    SUBCASE("Gaussian slice against the analytic filtered profile") {
      PlaneFunction g(design, ta);
      // golden profile is K applied to exp(-t^2/2) with unit constant
      const GridFunction s0 = GridFunction::sample(ta, [](std::span<const double> x) { return std::exp(-0.5 * x[0] * x[0]); });
      std::copy(s0.values().begin(), s0.values().end(), g.slice(0).begin());
      const PlaneFunction f = filter_K(g, s21);
      const auto& ref = golden()["filtered_gaussian"];
      const double scale = filter_constant(2, 1);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < ref["t"].size(); ++i) {
        const double ti[] = {ref["t"][i].get<double>()};
        const double want = scale * ref["value"][i].get<double>();
        const double got = f.interpolate(0, ti);
        num += (got - want) * (got - want);
        den += want * want;
      }
      CHECK(std::sqrt(num / den) <= 1e-3);
    }
    SUBCASE("constant slices are annihilated away from the edges") {
      const OperatorSpec s31{OperatorFamily::fractional_laplacian, 3.0, 3, 1};
      PlaneFunction g(DirectionDesign::plane_frames(1), uniform_axes(2, 33, 4.0));
      for (double& v : g.values()) v = 1.0;
      const PlaneFunction f = filter_K(g, s31, 1);
      // With pad 1 the slice is periodic, so the constant is exactly a zero mode.
      double worst = 0.0;
      for (double v : f.values()) worst = std::max(worst, std::abs(v));
      CHECK(worst <= 1e-12);
    }
  }

  TEST_CASE("Fourier slice") {
    const GridFunction phi = gaussian(2, 256, 6.5, 0.0);
    Eigen::MatrixXd A(1, 2);
    A << std::cos(0.7), std::sin(0.7);
    const double r0 = fourier_slice_residual(phi, A);
    CHECK(r0 <= 1e-3);
    const double r1 = fourier_slice_residual(gaussian(2, 256, 6.5, 0.8), A);
    CHECK(r1 <= 2.0 * std::max(r0, 1e-6));
  }

  TEST_CASE("filtered backprojection") {
    const GridFunction phi = gaussian(2, 128, 6.5, 1.0);
    const OperatorSpec s20{OperatorFamily::fractional_laplacian, 3.0, 2, 0};
    CHECK(fbp_identity_residual(phi, s20, DirectionDesign::signed_permutations(2), default_t_axes(phi.axes(), 2)) <=
          1e-12);
    const OperatorSpec s21{OperatorFamily::fractional_laplacian, 2.0, 2, 1};
    CHECK(fbp_identity_residual(phi, s21, DirectionDesign::half_circle(90), default_t_axes(phi.axes(), 1)) <= 2e-2);
  }

  TEST_CASE("isotropic projection") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    const auto design = DirectionDesign::full_circle(32);
    const auto ta = uniform_axes(1, 21, 3.0);
    SUBCASE("even data is fixed") {
      PlaneFunction g(design, ta);
      for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t j = 0; j < 21; ++j) {
          const double v = n01(rng);
          g.slice(i)[j] = v;
          g.slice(i + 16)[20 - j] = v;
        }
      }
      CHECK(max_abs_difference(project_iso(g), g) == 0.0);
    }
    SUBCASE("idempotent") {
      PlaneFunction g(design, ta);
      for (double& v : g.values()) v = n01(rng);
      const PlaneFunction p = project_iso(g);
      CHECK(max_abs_difference(project_iso(p), p) <= 1e-12);
    }
    SUBCASE("functions of A^T t and |t| are fixed") {
      const auto sd = DirectionDesign::sphere(20);
      const auto t3 = uniform_axes(1, 15, 2.0);
      PlaneFunction g(sd, t3);
      std::vector<double> t(1);
      for (std::size_t i = 0; i < sd.size(); ++i) {
        const GridFunction s = GridFunction::sample(t3, [&](std::span<const double> tt) {
          const Eigen::RowVectorXd x = tt[0] * sd.direction(i);
          return std::sin(x[0] + 2 * x[1] - x[2]) + std::abs(tt[0]);
        });
        std::copy(s.values().begin(), s.values().end(), g.slice(i).begin());
      }
      CHECK(max_abs_difference(project_iso(g), g) <= 1e-12);
    }
    SUBCASE("missing rotations fall back to the nearest direction") {
      PlaneFunction g(DirectionDesign::half_circle(8), ta);
      const PlaneFunction p = project_iso(g);
      CHECK(p.warnings.nearest_direction);
    }
  }

  TEST_CASE("serial reference agrees bitwise") {
    const GridFunction phi = gaussian(3, 20, 5.0, 0.4);
    const auto design = DirectionDesign::plane_frames(3);
    const auto ta = default_t_axes(phi.axes(), 2);
    const PlaneFunction a = kplane_transform(phi, design, ta);
    const PlaneFunction b = reference::kplane_transform(phi, design, ta);
    CHECK(max_abs_difference(a, b) == 0.0);
    const GridFunction ba = backproject(a, phi.axes());
    const GridFunction bb = reference::backproject(a, phi.axes());
    for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i] == bb[i]);
  }
}
