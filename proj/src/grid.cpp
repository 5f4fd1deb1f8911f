#include "kpn/grid.hpp"

#include <algorithm>
#include <cmath>

#include "kpn/error.hpp"

namespace kpn {

std::vector<GridAxis> uniform_axes(int dim, int count, double extent) {
  return std::vector<GridAxis>(static_cast<std::size_t>(dim), GridAxis{count, extent});
}

GridFunction::GridFunction(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  init_strides();
  values_.assign(strides_.empty() ? 0 : strides_[0] * axes_[0].count, 0.0);
}

GridFunction::GridFunction(std::vector<GridAxis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  init_strides();
  const std::size_t expected = strides_.empty() ? 0 : strides_[0] * axes_[0].count;
  if (values_.size() != expected) {
    throw DomainError("GridFunction: value array length " + std::to_string(values_.size()) +
                      " does not match grid size " + std::to_string(expected));
  }
}

void GridFunction::init_strides() {
  if (axes_.empty() || axes_.size() > 8) throw DomainError("GridFunction: dimension must be 1..8");
  for (const auto& ax : axes_) {
    if (ax.count < 2 || !(ax.extent > 0.0)) {
      throw DomainError("GridFunction: every axis needs count >= 2 and extent > 0");
    }
  }
  strides_.assign(axes_.size(), 1);
  for (int a = static_cast<int>(axes_.size()) - 2; a >= 0; --a) {
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(axes_[a + 1].count);
  }
}

GridFunction GridFunction::sample(std::vector<GridAxis> axes,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction g(std::move(axes));
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel
  {
    std::vector<double> x(g.dim());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      g.node(static_cast<std::size_t>(i), x);
      g.values_[i] = f(x);
    }
  }
  return g;
}

std::vector<int> GridFunction::counts() const {
  std::vector<int> c;
  for (const auto& ax : axes_) c.push_back(ax.count);
  return c;
}

void GridFunction::node(std::size_t flat, std::span<double> x) const {
  for (int a = 0; a < dim(); ++a) {
    const std::size_t idx = (flat / strides_[a]) % static_cast<std::size_t>(axes_[a].count);
    x[a] = axes_[a].node(static_cast<int>(idx));
  }
}

double GridFunction::cell_volume() const {
  double v = 1.0;
  for (const auto& ax : axes_) v *= ax.spacing();
  return v;
}

double multilinear(const std::vector<GridAxis>& axes, std::span<const std::size_t> strides,
                   std::span<const double> values, std::span<const double> x) {
  const int d = static_cast<int>(axes.size());
  // Per-axis lower index and fractional weight.
  std::size_t base = 0;
  double frac[8];
  for (int a = 0; a < d; ++a) {
    const auto& ax = axes[a];
    double u = x[a] / ax.spacing() + 0.5 * (ax.count - 1);
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;  // snap onto nodes
    if (u < 0.0 || u > ax.count - 1) return 0.0;
    int i0 = static_cast<int>(std::floor(u));
    if (i0 == ax.count - 1) i0 = ax.count - 2;
    frac[a] = u - i0;
    base += static_cast<std::size_t>(i0) * strides[a];
  }
  double result = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::size_t off = base;
    for (int a = 0; a < d; ++a) {
      if (c & (1 << a)) {
        w *= frac[a];
        off += strides[a];
      } else {
        w *= 1.0 - frac[a];
      }
    }
    if (w != 0.0) result += w * values[off];
  }
  return result;
}

double GridFunction::interpolate(std::span<const double> x) const {
  return multilinear(axes_, strides_, values_, x);
}

double GridFunction::integrate() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * cell_volume();
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::boundary_ratio() const {
  const double peak = max_abs();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    bool on_boundary = false;
    for (int a = 0; a < dim(); ++a) {
      const std::size_t idx = (i / strides_[a]) % static_cast<std::size_t>(axes_[a].count);
      if (idx == 0 || idx + 1 == static_cast<std::size_t>(axes_[a].count)) on_boundary = true;
    }
    if (on_boundary) edge = std::max(edge, std::abs(values_[i]));
  }
  return edge / peak;
}

double GridFunction::max_abs_central(double fraction) const {
  double m = 0.0;
  std::vector<double> x(dim());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    node(i, x);
    bool inside = true;
    for (int a = 0; a < dim(); ++a) {
      if (std::abs(x[a]) > fraction * axes_[a].extent) inside = false;
    }
    if (inside) m = std::max(m, std::abs(values_[i]));
  }
  return m;
}

}  // namespace kpn
