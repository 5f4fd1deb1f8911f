#pragma once

// Independent reference solutions: polyharmonic interpolation (the k = 0
// case), the 1D grid-knot LASSO optimum and the sparsity bound.

#include <vector>

#include <Eigen/Dense>

#include "kpn/network.hpp"
#include "kpn/polyspace.hpp"

namespace kpn {

struct PolyharmonicFit {
  Eigen::VectorXd a;           // kernel weights
  PolyCoeffs b;                // polynomial part
  double interpolation_residual = 0.0;  // ||K a + P b - y||_inf / ||y||_inf
  double side_residual = 0.0;           // ||P^T a||_inf
};

/// Solves [K P; P^T 0][a; b] = [y; 0] with K_ij = rho_{alpha,d}(x_i - x_j) by
/// LU with partial pivoting. NumericalError names the failed precondition when
/// the system is singular.
PolyharmonicFit polyharmonic_interpolate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

/// Interpolant sum a_j rho(x - x_j) + b(x).
double polyharmonic_eval(const PolyharmonicFit& fit, const Eigen::MatrixXd& X, double alpha,
                         std::span<const double> x);

struct GridKnotResult {
  double objective = 0.0;
  std::vector<double> knots;
  Eigen::VectorXd v;
  Eigen::VectorXd c;
  double kkt_residual = 0.0;
};

/// LASSO optimum over atoms rho(x - t_j) with `n_knots` knots spread uniformly
/// over the data range padded by `pad_fraction` of its width on each side,
/// plus the degree-n_L polynomial block. Radial activations make the mirrored
/// atoms rho(-x - t) duplicates, so they are added only for the relu alias.
GridKnotResult grid_knot_optimum_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lambda,
                                    int n_knots, double alpha = 2.0, double pad_fraction = 0.1,
                                    ActivationAlias alias = ActivationAlias::none);

struct SparsityCertificate {
  bool ok = false;
  long nnz = 0;
  long bound = 0;
};

/// ok iff the number of nonzero atoms is at most M - dim P_{n_L}.
SparsityCertificate sparsity_certificate(const Model& model, long M);

}  // namespace kpn
