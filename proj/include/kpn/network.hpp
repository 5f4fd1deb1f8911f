#pragma once

// Shallow networks in representer form: a polynomial skip connection plus
// atoms v rho(A x - t) with Stiefel weights A.

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kpn/greens.hpp"
#include "kpn/operator.hpp"
#include "kpn/polyspace.hpp"

namespace kpn {

struct Atom {
  double v = 0.0;
  Eigen::MatrixXd A;  // (d-k) x d, orthonormal rows
  Eigen::VectorXd t;  // length d-k
};

struct Model {
  OperatorSpec spec;
  std::vector<Atom> atoms;
  PolyCoeffs poly;
  ActivationAlias alias = ActivationAlias::none;

  /// Model with no atoms and a zero polynomial of degree n_L.
  static Model empty(const OperatorSpec& spec, ActivationAlias alias = ActivationAlias::none);

  Activation activation() const;
  /// Throws DomainError when an invariant fails (shapes, Stiefel rows to
  /// 1e-10, polynomial degree, alias compatibility).
  void validate() const;
};

struct Dataset {
  Eigen::MatrixXd X;  // M x d
  Eigen::VectorXd y;  // M

  int dim() const { return static_cast<int>(X.cols()); }
  int size() const { return static_cast<int>(X.rows()); }
  /// M >= 1, matching sizes, finite entries.
  void validate() const;
};

/// c(x) + sum_n v_n rho(A_n x - t_n).
double forward(const Model& model, std::span<const double> x);
/// forward on every row of X.
Eigen::VectorXd forward(const Model& model, const Eigen::MatrixXd& X);

/// True when (A, t) and (A', t') define the same atom up to (UA, Ut), U
/// orthogonal: compares A^T A and A^T t entrywise to `tol`.
bool equivalent_atoms(const Atom& a, const Atom& b, double tol = 1e-9);

/// Atoms with equivalent parameters merged (weights added, first
/// representative kept, order of first appearance preserved).
std::vector<Atom> merge_atoms(const std::vector<Atom>& atoms, double tol = 1e-9);

/// sum |v_n| over merged atoms.
double reg_cost(const Model& model);

/// sum |v_n| in atom order, without merging.
double l1_norm(const std::vector<Atom>& atoms);

struct Dictionary {
  Eigen::MatrixXd G;  // M x N, G(m, i) = rho(A_i x_m - t_i)
  Eigen::MatrixXd P;  // M x q, Taylor monomials of degree <= n_L
};

/// Atom weights are ignored. DomainError when some A_i violates the Stiefel
/// constraint by 1e-8 or more.
Dictionary dictionary_matrix(const OperatorSpec& spec, const std::vector<Atom>& atoms,
                             const Eigen::MatrixXd& X, ActivationAlias alias = ActivationAlias::none);

/// P block alone.
Eigen::MatrixXd poly_matrix(int d, int n_L, const Eigen::MatrixXd& X);

namespace reference {
Dictionary dictionary_matrix(const OperatorSpec& spec, const std::vector<Atom>& atoms,
                             const Eigen::MatrixXd& X, ActivationAlias alias = ActivationAlias::none);
}  // namespace reference

nlohmann::json serialize(const Model& model);
/// SchemaError on malformed documents; DomainError on invariant violations.
Model deserialize(const nlohmann::json& j);

}  // namespace kpn
