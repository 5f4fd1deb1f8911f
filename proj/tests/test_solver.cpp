#include <doctest.h>

#include <cmath>
#include <random>

#include "kpn/error.hpp"
#include "kpn/solver.hpp"
#include "kpn/stiefel.hpp"

using namespace kpn;

TEST_SUITE("solver") {
  TEST_CASE("soft threshold") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-1.25, 0.0) == -1.25);
    CHECK_THROWS_AS(soft_threshold(1.0, -1.0), DomainError);
  }

  TEST_CASE("Stiefel projection") {
    const Eigen::MatrixXd A = random_stiefel(2, 4, 1);
    CHECK((stiefel_project(A) - A).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((stiefel_project(2.0 * A) - A).cwiseAbs().maxCoeff() <= 1e-14);
    Eigen::MatrixXd v(1, 2);
    v << 3.0, 4.0;
    const Eigen::MatrixXd p = stiefel_project(v);
    CHECK(p(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(p(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
    Eigen::MatrixXd deficient(2, 3);
    deficient << 1.0, 0.0, 0.0, 2.0, 0.0, 0.0;
    CHECK(stiefel_violation(stiefel_project(deficient, 7)) <= 1e-12);
  }

  TEST_CASE("lasso with identity design") {
    const Eigen::VectorXd y = (Eigen::VectorXd(5) << 2.0, -0.2, 0.7, -3.0, 0.0).finished();
    const double lambda = 1.0;
    const LassoResult r = lasso(Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd(5, 0), y, lambda);
    for (int i = 0; i < 5; ++i) CHECK(r.v[i] == doctest::Approx(soft_threshold(y[i], 0.5 * lambda)).epsilon(1e-14));
    // Grid search on the scalar problem (y - v)^2 + lambda |v|.
    double best = 0.0, best_f = 1e300;
    for (int k = -40000; k <= 40000; ++k) {
      const double v = k * 1e-4;
      const double f = (2.0 - v) * (2.0 - v) + lambda * std::abs(v);
      if (f < best_f) {
        best_f = f;
        best = v;
      }
    }
    CHECK(r.v[0] == doctest::Approx(best).epsilon(1e-4));
  }

  TEST_CASE("lasso above lambda_max") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd G(12, 30), P(12, 2);
    Eigen::VectorXd y(12);
    for (auto& x : G.reshaped()) x = n01(rng);
    for (int i = 0; i < 12; ++i) {
      P(i, 0) = 1.0;
      P(i, 1) = n01(rng);
      y[i] = n01(rng);
    }
    const double lm = lambda_max(G, P, y);
    const LassoResult r = lasso(G, P, y, 1.01 * lm);
    CHECK(r.v.cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd ls = P.colPivHouseholderQr().solve(y);
    CHECK((r.c - ls).cwiseAbs().maxCoeff() <= 1e-12);
    const LassoResult below = lasso(G, P, y, 0.2 * lm);
    CHECK(below.kkt_residual <= 1e-8);
    CHECK(below.v.cwiseAbs().maxCoeff() > 0.0);
  }

  TEST_CASE("lasso on polynomial data") {
    Eigen::MatrixXd P(6, 2), G(6, 4);
    Eigen::VectorXd y(6);
    for (int i = 0; i < 6; ++i) {
      P(i, 0) = 1.0;
      P(i, 1) = i;
      y[i] = 2.0 - 0.5 * i;
      for (int j = 0; j < 4; ++j) G(i, j) = std::abs(i - 1.5 * j);
    }
    const LassoResult r = lasso(G, P, y, 1e-3);
    CHECK(r.v.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("lasso rejects an ill-posed polynomial block") {
    Eigen::MatrixXd P = Eigen::MatrixXd::Ones(4, 2);
    CHECK_THROWS_AS(lasso(Eigen::MatrixXd::Identity(4, 4), P, Eigen::VectorXd::Ones(4), 0.1), DomainError);
    CHECK_THROWS_AS(lasso(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Ones(2), 0.1),
                    DomainError);
  }

  TEST_CASE("pruning") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    SUBCASE("already sparse") {
      Eigen::MatrixXd G(4, 3);
      for (auto& x : G.reshaped()) x = n01(rng);
      const Eigen::VectorXd v = (Eigen::VectorXd(3) << 1.0, 0.0, -2.0).finished();
      const PruneResult r = prune_support(G, Eigen::MatrixXd(4, 0), v, Eigen::VectorXd(0), Eigen::VectorXd::Zero(4));
      CHECK(r.v == v);
      CHECK(r.removed == 0);
    }
    SUBCASE("duplicate columns merge") {
      Eigen::MatrixXd G(5, 3);
      for (auto& x : G.reshaped()) x = n01(rng);
      G.col(2) = G.col(0);
      const Eigen::VectorXd v = (Eigen::VectorXd(3) << 0.75, 0.5, 0.25).finished();
      const PruneResult r = prune_support(G, Eigen::MatrixXd(5, 0), v, Eigen::VectorXd(0), Eigen::VectorXd::Zero(5));
      CHECK((r.v.array() != 0.0).count() == 2);
      CHECK(r.v[0] + r.v[2] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(r.v.lpNorm<1>() <= v.lpNorm<1>() + 1e-15);
    }
    SUBCASE("dense weights on a wide matrix") {
      Eigen::MatrixXd G(3, 5);
      for (auto& x : G.reshaped()) x = n01(rng);
      Eigen::VectorXd v(5);
      for (auto& x : v) x = n01(rng);
      const PruneResult r = prune_support(G, Eigen::MatrixXd(3, 0), v, Eigen::VectorXd(0), Eigen::VectorXd::Zero(3));
      CHECK((r.v.array() != 0.0).count() <= 3);
      CHECK((G * r.v - G * v).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(r.v.lpNorm<1>() <= v.lpNorm<1>() + 1e-12);
    }
  }

  TEST_CASE("training") {
    const OperatorSpec s21{OperatorFamily::fractional_laplacian, 2.0, 2, 1};
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    Dataset ds;
    ds.X.resize(12, 2);
    for (auto& x : ds.X.reshaped()) x = n01(rng);
    Eigen::MatrixXd A(1, 2);
    A << 0.6, -0.8;
    ds.y.resize(12);
    const GreensProfile prof = make_profile(s21);
    for (int i = 0; i < 12; ++i) {
      const double u = (A * ds.X.row(i).transpose())(0) - 0.2;
      ds.y[i] = 1.5 * rho_radial(prof, std::abs(u)) + 0.3 * ds.X(i, 0);
    }
    SUBCASE("huge lambda gives polynomial least squares") {
      FitConfig cfg;
      cfg.lambda = 1e6;
      cfg.width = 4;
      const TrainResult r = train(ds, s21, cfg);
      CHECK(r.model.atoms.empty());
      const Eigen::VectorXd ls = poly_matrix(2, 1, ds.X).colPivHouseholderQr().solve(ds.y);
      CHECK((r.model.poly.coeffs() - ls).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("planted atom") {
      FitConfig cfg;
      cfg.lambda = 0.05;
      cfg.width = 8;
      const TrainResult r = train(ds, s21, cfg);
      const double planted = 0.05 * 1.5;  // zero data fit
      CHECK(network_objective(r.model, ds, cfg.lambda) <= planted + 1e-8 * ds.y.squaredNorm());
      CHECK(r.trace.max_stiefel_violation() <= 1e-10);
      CHECK(r.trace.monotone(1e-12));
    }
    SUBCASE("deterministic") {
      FitConfig cfg;
      cfg.width = 6;
      cfg.max_iter = 60;
      cfg.seed = 99;
      CHECK(train(ds, s21, cfg).trace.to_csv() == train(ds, s21, cfg).trace.to_csv());
    }
    SUBCASE("dimension mismatch") {
      FitConfig cfg;
      const OperatorSpec s31{OperatorFamily::fractional_laplacian, 3.0, 3, 1};
      CHECK_THROWS_AS(train(ds, s31, cfg), DomainError);
    }
  }

  TEST_CASE("config validation and json") {
    FitConfig c;
    c.lambda = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FitConfig{};
    c.width = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FitConfig{};
    c.lambda = 0.25;
    c.seed = 12345678901234ULL;
    nlohmann::json j = c;
    const FitConfig back = j.get<FitConfig>();
    CHECK(back.lambda == 0.25);
    CHECK(back.seed == c.seed);
  }
}
