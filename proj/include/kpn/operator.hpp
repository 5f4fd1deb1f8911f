#pragma once

// Regularization operators admissible for the k-plane calculus, together with
// the universal constants of that calculus (sphere areas, backprojection
// normalization, null-space dimension).

#include <string>
#include <vector>

#include <json.hpp>

namespace kpn {

enum class OperatorFamily { fractional_laplacian };

/// Isotropic operator L with radial frequency profile |w|^alpha acting on R^d,
/// paired with the plane index k (atoms are (d-k)-variate).
struct OperatorSpec {
  OperatorFamily family = OperatorFamily::fractional_laplacian;
  double alpha = 2.0;
  int d = 2;
  int k = 1;

  /// Arity of the nonlinearity, d - k.
  int m() const { return d - k; }
  /// Highest polynomial degree annihilated by L: ceil(alpha) - 1.
  int n_L() const;
  /// Order of the zero of the radial profile at the origin.
  double gamma_L() const { return alpha; }
  /// Growth exponent of the radial profile at infinity.
  double gamma_L_prime() const { return alpha; }

  bool operator==(const OperatorSpec&) const = default;
};

struct AdmissibilityReport {
  bool ok = false;
  int n_L = -1;
  double gamma_L = 0.0;
  double gamma_L_prime = 0.0;
  std::vector<std::string> messages;
};

/// Never throws: violations are reported in `messages`.
AdmissibilityReport check_admissibility(const OperatorSpec& spec);

/// Radial profile of the operator's frequency response, omega^alpha.
double radial_symbol(const OperatorSpec& spec, double omega);

/// Surface area of the unit sphere S^{m-1} in R^m, 2 pi^{m/2} / Gamma(m/2).
double sphere_area(int m);

/// Constant c_{d,k} making R_k^* K_{d-k} R_k = Id when the Stiefel manifold
/// carries its unnormalized Haar measure. By convention c_{d,0} = 1 (the
/// orthogonal group carries the probability measure).
double backprojection_constant(int d, int k);

/// Total Haar mass of V_{d-k}(R^d) whose normalization matches
/// backprojection_constant: prod_{n=k+1}^{d} |S^{n-1}| for k >= 1, and 1 for
/// k = 0.
double stiefel_volume(int d, int k);

/// Dimension of the space of polynomials of degree <= n_L on R^d. Zero for
/// n_L = -1.
long null_space_dim(int d, int n_L);

std::string to_string(OperatorFamily family);
OperatorFamily operator_family_from_string(const std::string& name);

void to_json(nlohmann::json& j, const OperatorSpec& spec);
void from_json(const nlohmann::json& j, OperatorSpec& spec);

}  // namespace kpn
