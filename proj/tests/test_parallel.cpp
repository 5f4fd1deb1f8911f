#include <doctest.h>

#include <random>

#include "kpn/error.hpp"
#include "kpn/kplane.hpp"
#include "kpn/network.hpp"
#include "kpn/parallel.hpp"
#include "kpn/stiefel.hpp"

using namespace kpn;

TEST_SUITE("parallel") {
  TEST_CASE("thread count control") {
    CHECK_THROWS_AS(parallel::set_threads(0), ConfigError);
    parallel::set_threads(2);
    CHECK(parallel::max_threads() >= 1);
    parallel::set_threads(1);
    CHECK(parallel::max_threads() == 1);
  }

  TEST_CASE("ordered sums do not depend on the thread count") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    std::vector<double> x(10007);
    for (double& v : x) v = n01(rng) * 1e3;
    auto f = [&](std::ptrdiff_t i) { return x[static_cast<std::size_t>(i)]; };
    parallel::set_threads(1);
    const double s1 = parallel::ordered_sum(10007, f);
    parallel::set_threads(3);
    const double s3 = parallel::ordered_sum(10007, f);
    parallel::set_threads(1);
    CHECK(s1 == s3);
  }

  TEST_CASE("kernels match the serial references") {
    const OperatorSpec s31{OperatorFamily::fractional_laplacian, 3.0, 3, 1};
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    std::vector<Atom> atoms;
    for (int i = 0; i < 40; ++i) atoms.push_back({0.0, random_stiefel(2, 3, rng()), Eigen::Vector2d(n01(rng), n01(rng))});
    Eigen::MatrixXd X(30, 3);
    for (auto& v : X.reshaped()) v = n01(rng);
    for (int threads : {1, 3}) {
      parallel::set_threads(threads);
      const Dictionary a = dictionary_matrix(s31, atoms, X);
      const Dictionary b = reference::dictionary_matrix(s31, atoms, X);
      CHECK(a.G == b.G);
      CHECK(a.P == b.P);

      const GridFunction phi = GridFunction::sample(uniform_axes(2, 48, 5.0), [](std::span<const double> x) {
        return std::exp(-0.5 * ((x[0] - 0.7) * (x[0] - 0.7) + x[1] * x[1]));
      });
      const auto design = DirectionDesign::half_circle(24);
      const auto ta = default_t_axes(phi.axes(), 1);
      const PlaneFunction R = kplane_transform(phi, design, ta);
      CHECK(max_abs_difference(R, reference::kplane_transform(phi, design, ta)) == 0.0);
      const GridFunction B = backproject(R, phi.axes());
      const GridFunction Bref = reference::backproject(R, phi.axes());
      CHECK(std::equal(B.values().begin(), B.values().end(), Bref.values().begin()));
    }
    parallel::set_threads(1);
  }
}
