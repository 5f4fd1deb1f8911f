#pragma once

// The Stiefel manifold V_m(R^d) of m x d matrices with orthonormal rows.

#include <cstdint>

#include <Eigen/Dense>

namespace kpn {

/// ||A A^T - I||_F.
double stiefel_violation(const Eigen::MatrixXd& A);

/// Nearest Stiefel point in the Frobenius norm: the orthogonal polar factor
/// U V^T of the thin SVD. A rank-deficient input is perturbed once by a seeded
/// Gaussian of scale 1e-12 ||M||_F; NumericalError if still deficient.
Eigen::MatrixXd stiefel_project(const Eigen::MatrixXd& M, std::uint64_t seed = 0);

/// Orthonormal basis of the null space of A, as the rows of a (d-m) x d matrix.
Eigen::MatrixXd null_basis(const Eigen::MatrixXd& A);

/// Haar-distributed point of V_m(R^d) drawn from `seed`.
Eigen::MatrixXd random_stiefel(int m, int d, std::uint64_t seed);

/// Haar-distributed orthogonal m x m matrix.
Eigen::MatrixXd random_orthogonal(int m, std::uint64_t seed);

}  // namespace kpn
