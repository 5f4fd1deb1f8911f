#include "kpn/oracles.hpp"

#include <cmath>

#include "kpn/error.hpp"
#include "kpn/greens.hpp"
#include "kpn/solver.hpp"

namespace kpn {

PolyharmonicFit polyharmonic_interpolate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  const Eigen::Index M = X.rows();
  const int d = static_cast<int>(X.cols());
  if (y.size() != M) throw DomainError("polyharmonic_interpolate: X and y lengths differ");
  if (!(alpha > d)) throw DomainError("polyharmonic_interpolate: need alpha > d");
  const GreensProfile prof = make_profile(alpha, d);
  const int n_L = static_cast<int>(std::ceil(alpha)) - 1;
  const Eigen::MatrixXd P = poly_matrix(d, n_L, X);
  const Eigen::Index q = P.cols();
  if (M < q) throw NumericalError("polyharmonic_interpolate: fewer points than polynomial terms");

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(M + q, M + q);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) {
      S(i, j) = rho_radial(prof, (X.row(i) - X.row(j)).norm());
    }
  }
  S.topRightCorner(M, q) = P;
  S.bottomLeftCorner(q, M) = P.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M + q);
  rhs.head(M) = y;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
  if (!(lu.rcond() > 1e-14)) {
    throw NumericalError("polyharmonic_interpolate: saddle system singular; points must be distinct and "
                         "unisolvent for polynomials of degree " + std::to_string(n_L));
  }
  Eigen::VectorXd sol = lu.solve(rhs);
  sol += lu.solve(rhs - S * sol);

  PolyharmonicFit fit;
  fit.a = sol.head(M);
  fit.b = PolyCoeffs(d, n_L, sol.tail(q));
  const Eigen::VectorXd fitted = S.topLeftCorner(M, M) * fit.a + P * fit.b.coeffs();
  const double ynorm = std::max(y.cwiseAbs().maxCoeff(), 1e-300);
  fit.interpolation_residual = (fitted - y).cwiseAbs().maxCoeff() / ynorm;
  fit.side_residual = q > 0 ? (P.transpose() * fit.a).cwiseAbs().maxCoeff() : 0.0;
  return fit;
}

double polyharmonic_eval(const PolyharmonicFit& fit, const Eigen::MatrixXd& X, double alpha,
                         std::span<const double> x) {
  const int d = static_cast<int>(X.cols());
  const GreensProfile prof = make_profile(alpha, d);
  double f = fit.b(x);
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (x[a] - X(j, a)) * (x[a] - X(j, a));
    f += fit.a[j] * rho_radial(prof, std::sqrt(r2));
  }
  return f;
}

GridKnotResult grid_knot_optimum_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lambda,
                                    int n_knots, double alpha, double pad_fraction, ActivationAlias alias) {
  if (x.size() != y.size() || x.size() < 1) throw DomainError("grid_knot_optimum_1d: bad data");
  if (n_knots < 2) throw DomainError("grid_knot_optimum_1d: need at least 2 knots");
  const OperatorSpec spec{OperatorFamily::fractional_laplacian, alpha, 1, 0};
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  const double pad = pad_fraction * std::max(hi - lo, 1e-12);

  GridKnotResult res;
  std::vector<Atom> atoms;
  for (int j = 0; j < n_knots; ++j) {
    const double t = (lo - pad) + (hi - lo + 2 * pad) * j / (n_knots - 1);
    res.knots.push_back(t);
    atoms.push_back(Atom{0.0, Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Constant(1, t)});
  }
  if (alias == ActivationAlias::relu) {
    for (int j = 0; j < n_knots; ++j) {
      // Mirrored atoms rho(-x - t) with -t spanning the same padded range.
      atoms.push_back(Atom{0.0, Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Constant(1, -res.knots[j])});
    }
  }
  const Eigen::MatrixXd X = x;
  const Dictionary D = dictionary_matrix(spec, atoms, X, alias);
  const LassoResult lr = lasso(D.G, D.P, y, lambda);
  res.objective = lr.objective;
  res.v = lr.v;
  res.c = lr.c;
  res.kkt_residual = lr.kkt_residual;
  return res;
}

SparsityCertificate sparsity_certificate(const Model& model, long M) {
  SparsityCertificate c;
  for (const auto& a : model.atoms) {
    if (a.v != 0.0) ++c.nnz;
  }
  c.bound = M - null_space_dim(model.spec.d, model.spec.n_L());
  c.ok = c.nnz <= c.bound;
  return c;
}

}  // namespace kpn
