#pragma once

// Green's functions of the fractional Laplacian |w|^alpha in m variables, the
// null-space-corrected kernel g_{A,t} and a spectral weak-identity oracle.

#include <memory>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "kpn/grid.hpp"
#include "kpn/operator.hpp"
#include "kpn/polyspace.hpp"

namespace kpn {

enum class GreensBranch {
  power,      // A * |t|^{alpha-m},            alpha - m not an even integer
  power_log,  // B * |t|^{2m'} log |t|,        alpha - m = 2m'
};

std::string to_string(GreensBranch b);

struct GreensConstant {
  GreensBranch branch = GreensBranch::power;
  double constant = 0.0;
  int m_prime = 0;  // only meaningful for power_log
};

/// Throws DomainError when alpha <= m (no pointwise Green's function).
GreensConstant greens_constant(double alpha, int m);

struct GreensProfile {
  int m = 1;
  double alpha = 2.0;
  GreensBranch branch = GreensBranch::power;
  double constant = 0.0;
  int m_prime = 0;
};

GreensProfile make_profile(double alpha, int m);
GreensProfile make_profile(const OperatorSpec& spec);

/// rho as a function of r = |t|; rho(0) = 0.
double rho_radial(const GreensProfile& p, double r);
double rho(const GreensProfile& p, std::span<const double> t);
/// s(r) with grad rho(t) = s(|t|) t. Zero at r = 0.
double rho_gradient_scale(const GreensProfile& p, double r);

/// Activations that differ from rho by a null-space element (and possibly a
/// sign). Evaluated verbatim; metadata only as far as costs are concerned.
enum class ActivationAlias {
  none,
  relu,      // t_+ for (alpha=2, m=1)
  abs_half,  // |t|/2 for (alpha=2, m=1)
  norm,      // |t| for alpha = m + 1
};

std::string to_string(ActivationAlias a);
ActivationAlias activation_alias_from_string(const std::string& s);
/// Throws DomainError if the alias is not null-space-equivalent to rho for p.
void check_alias(const GreensProfile& p, ActivationAlias alias);

/// The neuron nonlinearity used by networks: rho or one of its aliases.
struct Activation {
  GreensProfile profile;
  ActivationAlias alias = ActivationAlias::none;

  double operator()(std::span<const double> u) const;
  /// Writes grad into `grad` (same length as u).
  void gradient(std::span<const double> u, std::span<double> grad) const;
};

/// Analytic test function proportional to (-Delta)^p exp(-|x|^2/2) on R^m,
/// p in [0, 6], scaled so that its value at the origin is 1.
struct TestFunction {
  GridFunction samples;
  double value_at_origin = 0.0;
};
TestFunction gaussian_test_function(int m, const std::vector<GridAxis>& axes, int laplacian_power = 0);

struct WeakIdentityOptions {
  double boundary_tolerance = 1e-10;  // max boundary |phi| / max |phi|
  int pad = 2;
};

/// |<rho, L phi> - phi(0)| with L phi computed by the spectral multiplier
/// |w|^alpha and the pairing by the trapezoidal rule.
double weak_identity_residual(const GreensProfile& p, const GridFunction& phi, double phi_at_origin,
                              const WeakIdentityOptions& opts = {});

/// Default oracle grid: 4096 points on [-20, 20] for m = 1, 512^2 on
/// [-16, 16]^2 for m = 2, 96^3 on [-12, 12]^3 otherwise.
std::vector<GridAxis> default_weak_identity_axes(int m);
/// Laplacian power of the default test function: 0 (plain Gaussian) for
/// integer even alpha, 4 otherwise, so that L phi decays fast enough for the
/// truncated pairing.
int default_test_laplacian_power(double alpha);
/// Residual on the default grid scaled by `refinement` points per axis.
double weak_identity_residual_default(const GreensProfile& p, int refinement = 1);

/// The kernel g_{A,t}(x) = rho(Ax - t) - sum_n <m_n^*, rho(A . - t)> m_n(x).
///
/// The pairings are reduced through the Fourier slice identity to the plane
/// dimension m = d - k: the k-plane transform of m_n^* along A has spectrum
/// (-i A^T w)^n kappa_hat(|w|), which expands over the m-variate duals m_b^*.
/// The m-variate corrector therefore carries the quadrature, on a grid fine
/// enough to resolve the kink of rho.
class GKernel {
 public:
  /// `ridge` must be built for dimension m = d - k; its n_L sets the degree of
  /// the correction (n_L = -1 disables it).
  GKernel(GreensProfile profile, int d, std::shared_ptr<const PolyCorrector> ridge);

  int dim() const { return d_; }
  int correction_degree() const { return ridge_->n_L(); }
  const std::vector<MultiIndex>& basis() const { return basis_; }
  const GreensProfile& profile() const { return profile_; }

  /// <m_n^*, rho(A . - t)> for every n in basis().
  Eigen::VectorXd correction(const Eigen::MatrixXd& A, const Eigen::VectorXd& t) const;
  double operator()(const Eigen::MatrixXd& A, const Eigen::VectorXd& t, const Eigen::VectorXd& x) const;
  double evaluate(const Eigen::MatrixXd& A, const Eigen::VectorXd& t, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& correction) const;

 private:
  GreensProfile profile_;
  int d_;
  std::shared_ptr<const PolyCorrector> ridge_;
  std::vector<MultiIndex> basis_;
};

/// Convenience wrapper checking that `ridge` matches (d - k, n_L) of `spec`.
double kernel_g(const OperatorSpec& spec, const Eigen::MatrixXd& A, const Eigen::VectorXd& t,
                const Eigen::VectorXd& x, const PolyCorrector& ridge);

}  // namespace kpn
