#include <doctest.h>

#include <cmath>
#include <random>

#include "kpn/error.hpp"
#include "kpn/network.hpp"
#include "kpn/stiefel.hpp"

using namespace kpn;

namespace {

Model random_model(const OperatorSpec& spec, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Model m = Model::empty(spec);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd t(spec.m());
    for (auto& x : t) x = n01(rng);
    m.atoms.push_back({n01(rng), random_stiefel(spec.m(), spec.d, rng()), t});
  }
  for (auto& c : m.poly.coeffs()) c = n01(rng);
  return m;
}

}  // namespace

TEST_SUITE("network") {
  const OperatorSpec s21{OperatorFamily::fractional_laplacian, 2.0, 2, 1};

  TEST_CASE("forward") {
    Model m = Model::empty(s21);
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 0.0;
    m.atoms.push_back({1.0, A, Eigen::VectorXd::Zero(1)});
    const double x[] = {2.0, 5.0};
    CHECK(forward(m, x) == doctest::Approx(-1.0).epsilon(1e-15));

    Model skip = Model::empty(s21);
    skip.poly.set_coefficient({0, 0}, 3.0);
    skip.poly.set_coefficient({1, 0}, 1.0);
    const double y[] = {0.25, -4.0};
    CHECK(forward(skip, y) == doctest::Approx(3.25).epsilon(1e-15));
  }

  TEST_CASE("k = 0 atoms are radial basis functions") {
    const OperatorSpec s20{OperatorFamily::fractional_laplacian, 4.0, 2, 0};
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    std::vector<Atom> atoms;
    Eigen::MatrixXd X(6, 2);
    for (auto& x : X.reshaped()) x = n01(rng);
    for (int i = 0; i < 5; ++i) atoms.push_back({1.0, random_orthogonal(2, rng()), Eigen::Vector2d(n01(rng), n01(rng))});
    const Dictionary D = dictionary_matrix(s20, atoms, X);
    const GreensProfile p = make_profile(4.0, 2);
    double worst = 0.0;
    for (int mrow = 0; mrow < 6; ++mrow) {
      for (int i = 0; i < 5; ++i) {
        const Eigen::Vector2d tau = atoms[i].A.transpose() * atoms[i].t;
        worst = std::max(worst, std::abs(D.G(mrow, i) - rho_radial(p, (X.row(mrow).transpose() - tau).norm())));
      }
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("regularization cost") {
    Model m = Model::empty(s21);
    CHECK(reg_cost(m) == 0.0);
    for (int i = 0; i < 3; ++i) {
      Eigen::MatrixXd A(1, 2);
      A << std::cos(0.4 * i), std::sin(0.4 * i);
      m.atoms.push_back({double((i + 1) * (i == 1 ? -1 : 1)), A, Eigen::VectorXd::Constant(1, 0.1 * i)});
    }
    CHECK(reg_cost(m) == 6.0);

    Model pair = Model::empty(s21);
    Eigen::MatrixXd A(1, 2);
    A << 0.6, 0.8;
    pair.atoms.push_back({1.0, A, Eigen::VectorXd::Constant(1, 0.3)});
    pair.atoms.push_back({-1.0, -A, Eigen::VectorXd::Constant(1, -0.3)});
    CHECK(reg_cost(pair) == 0.0);

    const OperatorSpec s31{OperatorFamily::fractional_laplacian, 4.0, 3, 1};
    Model rot = Model::empty(s31);
    const Eigen::MatrixXd B = random_stiefel(2, 3, 4);
    const Eigen::MatrixXd U = random_orthogonal(2, 8);
    const Eigen::VectorXd t = Eigen::Vector2d(0.2, -1.0);
    rot.atoms.push_back({0.5, B, t});
    rot.atoms.push_back({0.25, U * B, U * t});
    CHECK(reg_cost(rot) == 0.75);
    CHECK(l1_norm(rot.atoms) == 0.75);
  }

  TEST_CASE("dictionary shapes") {
    Eigen::MatrixXd X(1, 2);
    X << 0.5, -1.5;
    Eigen::MatrixXd A(1, 2);
    A << 0.0, 1.0;
    const Dictionary D = dictionary_matrix(s21, {{0.0, A, Eigen::VectorXd::Constant(1, 0.5)}}, X);
    CHECK(D.G.rows() == 1);
    CHECK(D.G.cols() == 1);
    CHECK(D.G(0, 0) == doctest::Approx(-1.0));
    CHECK(D.P.cols() == 3);
    CHECK(D.P(0, 0) == 1.0);
    Eigen::MatrixXd bad(1, 2);
    bad << 1.0, 1.0;
    CHECK_THROWS_AS(dictionary_matrix(s21, {{0.0, bad, Eigen::VectorXd::Zero(1)}}, X), DomainError);
  }

  TEST_CASE("serialization") {
    const OperatorSpec s31{OperatorFamily::fractional_laplacian, 3.5, 3, 1};
    const Model m = random_model(s31, 4, 21);
    const Model back = deserialize(nlohmann::json::parse(serialize(m).dump()));
    CHECK(back.spec == m.spec);
    REQUIRE(back.atoms.size() == m.atoms.size());
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      CHECK(back.atoms[i].v == m.atoms[i].v);
      CHECK(back.atoms[i].A == m.atoms[i].A);
      CHECK(back.atoms[i].t == m.atoms[i].t);
    }
    CHECK(back.poly.coeffs() == m.poly.coeffs());

    nlohmann::json skewed = serialize(m);
    skewed["atoms"][0]["A"][0][0] = skewed["atoms"][0]["A"][0][0].get<double>() + 1e-3;
    CHECK_THROWS_AS(deserialize(skewed), DomainError);
    nlohmann::json family = serialize(m);
    family["spec"]["family"] = "wave";
    CHECK_THROWS_AS(deserialize(family), Error);
    nlohmann::json missing = serialize(m);
    missing.erase("atoms");
    CHECK_THROWS_AS(deserialize(missing), SchemaError);
  }

  TEST_CASE("dataset validation") {
    Dataset ds;
    ds.X = Eigen::MatrixXd::Zero(3, 2);
    ds.y = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(ds.validate(), DomainError);
    ds.y = Eigen::VectorXd::Zero(3);
    ds.X(1, 1) = std::nan("");
    CHECK_THROWS_AS(ds.validate(), DomainError);
  }
}
