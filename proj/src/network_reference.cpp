// Serial dictionary assembly, kept for cross-checking the parallel version.

#include "kpn/error.hpp"
#include "kpn/network.hpp"
#include "kpn/stiefel.hpp"

namespace kpn::reference {

Dictionary dictionary_matrix(const OperatorSpec& spec, const std::vector<Atom>& atoms,
                             const Eigen::MatrixXd& X, ActivationAlias alias) {
  if (X.cols() != spec.d) throw DomainError("dictionary_matrix: data dimension mismatch");
  const Activation act{make_profile(spec), alias};
  Dictionary D;
  D.G.resize(X.rows(), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto& a = atoms[j];
    if (!(stiefel_violation(a.A) < 1e-8)) throw DomainError("dictionary_matrix: Stiefel violation");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      Eigen::VectorXd u(a.A.rows());
      for (Eigen::Index r = 0; r < a.A.rows(); ++r) {
        double s = -a.t[r];
        for (Eigen::Index c = 0; c < X.cols(); ++c) s += a.A(r, c) * X(i, c);
        u[r] = s;
      }
      D.G(i, static_cast<Eigen::Index>(j)) = act(std::span<const double>(u.data(), u.size()));
    }
  }
  D.P = poly_matrix(spec.d, spec.n_L(), X);
  return D;
}

}  // namespace kpn::reference
