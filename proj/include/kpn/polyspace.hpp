#pragma once

// Polynomial null space P_{n_L}(R^d): Taylor monomials, the band-limited dual
// basis m_n^* and the projector onto polynomials.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kpn/grid.hpp"

namespace kpn {

using MultiIndex = std::vector<int>;

int degree(const MultiIndex& n);
std::string to_string(const MultiIndex& n);  // "(n1,...,nd)"
MultiIndex multi_index_from_string(const std::string& s);

/// All multi-indices of length d with |n| <= n_max, graded by degree and
/// lexicographically ascending inside a degree. Empty for n_max = -1.
std::vector<MultiIndex> enumerate_multi_indices(int d, int n_max);

/// Taylor monomial x^n / n!.
double monomial_eval(const MultiIndex& n, std::span<const double> x);

/// Coefficients b_n of p = sum b_n m_n over the graded-lex basis of degree
/// <= `degree` in dimension d.
class PolyCoeffs {
 public:
  PolyCoeffs() = default;
  PolyCoeffs(int d, int degree);
  PolyCoeffs(int d, int degree, Eigen::VectorXd coeffs);

  int dim() const { return d_; }
  int degree() const { return degree_; }
  std::size_t size() const { return basis_.size(); }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  double coefficient(const MultiIndex& n) const;
  void set_coefficient(const MultiIndex& n, double value);

  double operator()(std::span<const double> x) const;
  /// Norm of the coefficient vector.
  double norm() const { return coeffs_.norm(); }

 private:
  int d_ = 1;
  int degree_ = -1;
  std::vector<MultiIndex> basis_;
  Eigen::VectorXd coeffs_;
};

void to_json(nlohmann::json& j, const PolyCoeffs& p);
PolyCoeffs poly_from_json(const nlohmann::json& j, int d);

/// Radial spectral bump: 1 on [0, R0], 0 on [1, inf), C^infinity in between.
double kappa_hat(double omega, double R0 = 0.5);

/// Real-space quadrature grid for the dual basis.
struct CorrectorGrid {
  double R0 = 0.5;
  double extent = 1200.0;
  int points_per_axis = 4096;

  /// Grid sized for Gram / projection accuracy in dimension d.
  static CorrectorGrid defaults(int d);
  /// Finer grid used when pairing the dual basis against kinked ridge
  /// profiles (see GKernel).
  static CorrectorGrid ridge_defaults(int m);
};

void to_json(nlohmann::json& j, const CorrectorGrid& g);
void from_json(const nlohmann::json& j, CorrectorGrid& g);

/// Samples of the dual functions m_n^* (spectrum (-i xi)^n kappa_hat(|xi|)) on
/// a uniform grid. Immutable after construction.
class PolyCorrector {
 public:
  PolyCorrector() = default;

  int dim() const { return d_; }
  int n_L() const { return n_L_; }
  const CorrectorGrid& grid() const { return grid_; }
  const std::vector<GridAxis>& axes() const { return axes_; }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  const GridFunction& dual(std::size_t i) const { return duals_[i]; }
  double imag_residue() const { return imag_residue_; }
  double edge_ratio() const { return edge_ratio_; }

  /// <m_n^*, f> by trapezoidal quadrature; f sampled on axes().
  double pair(std::size_t basis_index, std::span<const double> f) const;
  /// <m_n^*, m_n'> over the basis; the identity up to quadrature error.
  Eigen::MatrixXd gram() const;

  friend PolyCorrector build_corrector(int d, int n_L, const CorrectorGrid& grid);

 private:
  int d_ = 1;
  int n_L_ = -1;
  CorrectorGrid grid_;
  std::vector<GridAxis> axes_;
  std::vector<MultiIndex> basis_;
  std::vector<GridFunction> duals_;
  double imag_residue_ = 0.0;
  double edge_ratio_ = 0.0;
};

/// Throws ConfigError for unsupported d (> 3), n_L > 3, or a grid whose
/// Nyquist frequency or extent cannot represent the dual basis to 1e-8.
PolyCorrector build_corrector(int d, int n_L, const CorrectorGrid& grid);
PolyCorrector build_corrector(int d, int n_L);

/// Coefficients <m_n^*, f> of the projection of f onto P_{n_L}.
PolyCoeffs project_poly(const PolyCorrector& corrector, const GridFunction& f);

/// Samples of a polynomial on a grid.
GridFunction sample_poly(const PolyCoeffs& p, const std::vector<GridAxis>& axes);

}  // namespace kpn
