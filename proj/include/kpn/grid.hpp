#pragma once

// Uniform tensor grids on symmetric boxes and sampled functions on them.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kpn {

/// n equally spaced nodes covering [-extent, extent] inclusive. Node i sits at
/// (i - (n-1)/2) * spacing, so node(n-1-i) == -node(i) exactly.
struct GridAxis {
  int count = 0;
  double extent = 0.0;

  double spacing() const { return 2.0 * extent / (count - 1); }
  double node(int i) const { return (i - 0.5 * (count - 1)) * spacing(); }
  bool operator==(const GridAxis&) const = default;
};

std::vector<GridAxis> uniform_axes(int dim, int count, double extent);

/// Multilinear interpolation of row-major samples on `axes` (up to 8 axes);
/// zero outside the box. Points within 1e-9 cells of a node take its value.
double multilinear(const std::vector<GridAxis>& axes, std::span<const std::size_t> strides,
                   std::span<const double> values, std::span<const double> x);

/// Row-major sample array on a tensor grid (last axis varies fastest).
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::vector<GridAxis> axes);
  GridFunction(std::vector<GridAxis> axes, std::vector<double> values);

  static GridFunction sample(std::vector<GridAxis> axes,
                             const std::function<double(std::span<const double>)>& f);

  int dim() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return values_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  const GridAxis& axis(int a) const { return axes_[a]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::vector<int> counts() const;
  std::size_t stride(int a) const { return strides_[a]; }
  std::span<const std::size_t> strides() const { return strides_; }
  /// Coordinates of the node with flat index `flat`.
  void node(std::size_t flat, std::span<double> x) const;
  double cell_volume() const;

  /// Multilinear interpolation; zero outside the grid box.
  double interpolate(std::span<const double> x) const;
  /// Trapezoidal integral of the samples (boundary values are assumed ~0).
  double integrate() const;
  double max_abs() const;
  /// Largest |value| over boundary nodes divided by the largest |value|.
  double boundary_ratio() const;

  /// Largest |value| at nodes with every |x_a| <= fraction * extent_a.
  double max_abs_central(double fraction) const;

 private:
  void init_strides();

  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

}  // namespace kpn
