#pragma once

// Discrete k-plane calculus: the transform R_k, its dual R_k^*, the filter
// K_{d-k} and the isotropic projector, on uniform grids.
//
// Directions are points A of the Stiefel manifold V_{d-k}(R^d); a plane is
// {x : A x = t}. Designs carry probability weights, so the backprojection
// is an average over directions.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpn/grid.hpp"
#include "kpn/operator.hpp"

namespace kpn {

struct TransformWarnings {
  bool boundary_decay = false;     // input not negligible at the grid boundary
  bool extrapolated = false;       // lookups outside the t-grid were taken as 0
  bool nearest_direction = false;  // project_iso used a nearest design direction
  std::vector<std::string> messages;

  bool any() const { return boundary_decay || extrapolated || nearest_direction; }
  void merge(const TransformWarnings& other);
};

class DirectionDesign {
 public:
  DirectionDesign() = default;
  /// Validates Stiefel rows (1e-12) and weights (nonnegative, sum 1 +- 1e-12).
  DirectionDesign(int d, int k, std::vector<Eigen::MatrixXd> directions, std::vector<double> weights);

  /// d=2, k=1: angles pi j / n, j < n. Not closed under A -> -A.
  static DirectionDesign half_circle(int n);
  /// d=2, k=1: angles 2 pi j / n for even n, closed under A -> -A.
  static DirectionDesign full_circle(int n);
  /// d=3, k=2: n/2 Fibonacci points together with their antipodes (n even).
  static DirectionDesign sphere(int n);
  /// d=3, k=1: for each of n Fibonacci normals, the 8 frames of the plane
  /// obtained under the signed permutations of the frame rows.
  static DirectionDesign plane_frames(int n_normals);
  /// k=0: all d! 2^d signed permutation matrices.
  static DirectionDesign signed_permutations(int d);
  /// Default design of about `n` directions for (d, k).
  static DirectionDesign standard(int d, int k, int n);

  int d() const { return d_; }
  int k() const { return k_; }
  int m() const { return d_ - k_; }
  std::size_t size() const { return directions_.size(); }
  const Eigen::MatrixXd& direction(std::size_t i) const { return directions_[i]; }
  const std::vector<Eigen::MatrixXd>& directions() const { return directions_; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Index of the direction within `tol` (Frobenius) of A, or -1.
  long find(const Eigen::MatrixXd& A, double tol = 1e-9) const;
  /// Index of the closest direction (Frobenius).
  std::size_t nearest(const Eigen::MatrixXd& A) const;

 private:
  int d_ = 0;
  int k_ = 0;
  std::vector<Eigen::MatrixXd> directions_;
  std::vector<double> weights_;
};

/// Samples g(A_i, t) over a design and a tensor t-grid in R^{d-k}.
class PlaneFunction {
 public:
  PlaneFunction() = default;
  PlaneFunction(DirectionDesign design, std::vector<GridAxis> t_axes);
  PlaneFunction(DirectionDesign design, std::vector<GridAxis> t_axes, std::vector<double> values);

  const DirectionDesign& design() const { return design_; }
  const std::vector<GridAxis>& t_axes() const { return t_axes_; }
  std::size_t slice_size() const { return slice_size_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> slice(std::size_t i) const;
  std::span<double> slice(std::size_t i);
  /// The t-slice of direction i as a grid function.
  GridFunction slice_function(std::size_t i) const;
  /// Multilinear interpolation of slice i at t; 0 outside the t-box.
  double interpolate(std::size_t i, std::span<const double> t) const;

  TransformWarnings warnings;

 private:
  DirectionDesign design_;
  std::vector<GridAxis> t_axes_;
  std::size_t slice_size_ = 0;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

/// t-grid for transforms of functions on `axes`: for k=0 with equal axes the
/// grid itself; otherwise the cube of half-width sqrt(sum X_a^2) with the
/// finest spacing of `axes`, with an odd count so that t = 0 is a node.
std::vector<GridAxis> default_t_axes(const std::vector<GridAxis>& axes, int m);

/// Boundary/peak ratio above which the transform flags a decay warning.
inline constexpr double kDecayTolerance = 1e-8;

/// R_k phi(A_i, t) by trapezoidal quadrature over the plane with multilinear
/// interpolation of phi; the in-plane step is the finest grid spacing.
PlaneFunction kplane_transform(const GridFunction& phi, const DirectionDesign& design,
                               const std::vector<GridAxis>& t_axes);

/// R_k^* g(x) = sum_i w_i g(A_i, A_i x) on the grid `axes`.
GridFunction backproject(const PlaneFunction& g, const std::vector<GridAxis>& axes,
                         TransformWarnings* warnings = nullptr);

/// Multiplier applied along t by filter_K for the design's normalization:
/// c_{d,k} |V_{d-k}(R^d)| |w|^k.
double filter_constant(int d, int k);

/// K_{d-k} applied slice by slice. For d-k = 1 the slice is convolved with the
/// band-limited kernel of |w|^k (no wrap-around); otherwise the multiplier is
/// applied through the DFT with each t-axis zero-padded by `pad`.
PlaneFunction filter_K(const PlaneFunction& g, const OperatorSpec& spec, int pad = 2);

/// Serial reference versions of the three operators (tests and benchmarks).
namespace reference {
PlaneFunction kplane_transform(const GridFunction& phi, const DirectionDesign& design,
                               const std::vector<GridAxis>& t_axes);
GridFunction backproject(const PlaneFunction& g, const std::vector<GridAxis>& axes);
}  // namespace reference

/// Relative L2 distance between the continuous FT of R_k phi(A, .) and
/// phi^(A^T w), both at the DFT frequencies of the t-grid. The right side is a
/// direct trapezoidal evaluation of the d-dimensional transform.
double fourier_slice_residual(const GridFunction& phi, const Eigen::MatrixXd& A,
                              const std::vector<GridAxis>& t_axes);
double fourier_slice_residual(const GridFunction& phi, const Eigen::MatrixXd& A);

/// max |R^* K R phi - phi| over the central half of the grid, relative to
/// max |phi|.
double fbp_identity_residual(const GridFunction& phi, const OperatorSpec& spec,
                             const DirectionDesign& design, const std::vector<GridAxis>& t_axes,
                             int pad = 2);

/// Group samples of O_m used by project_iso: the signed permutation matrices
/// ({+1, -1} for m = 1).
std::vector<Eigen::MatrixXd> default_u_samples(int m);

/// P_iso g(A, t) = mean over U of g(UA, Ut). UA is looked up in the design;
/// when absent the nearest direction is used and flagged.
PlaneFunction project_iso(const PlaneFunction& g, const std::vector<Eigen::MatrixXd>& u_samples);
PlaneFunction project_iso(const PlaneFunction& g);

/// max |a - b| over two plane functions on the same layout.
double max_abs_difference(const PlaneFunction& a, const PlaneFunction& b);

}  // namespace kpn
