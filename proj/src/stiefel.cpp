#include "kpn/stiefel.hpp"

#include <random>

#include "kpn/error.hpp"

namespace kpn {

namespace {

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd G(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) G(i, j) = n01(rng);
  }
  return G;
}

bool full_row_rank(const Eigen::VectorXd& sv, double scale) {
  if (sv.size() == 0) return false;
  return sv.minCoeff() > 1e-14 * scale && sv.minCoeff() > 0.0;
}

}  // namespace

double stiefel_violation(const Eigen::MatrixXd& A) {
  const auto m = A.rows();
  return (A * A.transpose() - Eigen::MatrixXd::Identity(m, m)).norm();
}

Eigen::MatrixXd stiefel_project(const Eigen::MatrixXd& M, std::uint64_t seed) {
  if (M.rows() < 1 || M.rows() > M.cols()) {
    throw DomainError("stiefel_project: need 1 <= rows <= cols");
  }
  if (!M.allFinite()) throw NumericalError("stiefel_project: non-finite input");
  Eigen::MatrixXd W = M;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double scale = std::max(W.norm(), 1.0);
  if (!full_row_rank(svd.singularValues(), scale)) {
    W += 1e-12 * scale * gaussian_matrix(static_cast<int>(W.rows()), static_cast<int>(W.cols()), seed);
    svd.compute(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (!full_row_rank(svd.singularValues(), scale)) {
      throw NumericalError("stiefel_project: input rank deficient after perturbation");
    }
  }
  // W^T = V S U^T, so the polar factor of W is U V^T with (U, V) from W.
  return svd.matrixU() * svd.matrixV().transpose();
}

Eigen::MatrixXd null_basis(const Eigen::MatrixXd& A) {
  const auto m = A.rows();
  const auto d = A.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A.transpose());
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return Q.rightCols(d - m).transpose();
}

Eigen::MatrixXd random_stiefel(int m, int d, std::uint64_t seed) {
  return stiefel_project(gaussian_matrix(m, d, seed), seed ^ 0x9e3779b97f4a7c15ULL);
}

Eigen::MatrixXd random_orthogonal(int m, std::uint64_t seed) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(m, m, seed));
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  }
  return Q;
}

}  // namespace kpn
