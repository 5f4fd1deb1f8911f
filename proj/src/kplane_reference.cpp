// Straightforward serial loops, kept for cross-checking the parallel kernels.

#include <cmath>

#include "kpn/error.hpp"
#include "kpn/kplane.hpp"
#include "kpn/stiefel.hpp"

namespace kpn::reference {

PlaneFunction kplane_transform(const GridFunction& phi, const DirectionDesign& design,
                               const std::vector<GridAxis>& t_axes) {
  const int d = design.d();
  const int k = design.k();
  const int m = design.m();
  if (phi.dim() != d || static_cast<int>(t_axes.size()) != m) {
    throw DomainError("reference::kplane_transform: dimension mismatch");
  }
  double S2 = 0.0;
  double h = std::numeric_limits<double>::infinity();
  for (const auto& ax : phi.axes()) {
    S2 += ax.extent * ax.extent;
    h = std::min(h, ax.spacing());
  }
  int count = 1;
  if (k > 0) count = 2 * static_cast<int>(std::ceil(std::sqrt(S2) / h - 1e-9)) + 1;
  std::size_t n_s = 1;
  for (int a = 0; a < k; ++a) n_s *= static_cast<std::size_t>(count);
  const double scale = std::pow(h, k);

  PlaneFunction out(design, t_axes);
  const GridFunction t_grid(t_axes);
  std::vector<double> t(m), x(d);
  for (std::size_t i = 0; i < design.size(); ++i) {
    const Eigen::MatrixXd& A = design.direction(i);
    const Eigen::MatrixXd B = k > 0 ? null_basis(A) : Eigen::MatrixXd(0, d);
    auto slice = out.slice(i);
    for (std::size_t j = 0; j < slice.size(); ++j) {
      t_grid.node(j, t);
      double sum = 0.0;
      for (std::size_t s = 0; s < n_s; ++s) {
        for (int a = 0; a < d; ++a) {
          double v = 0.0;
          for (int r = 0; r < m; ++r) v += A(r, a) * t[r];
          x[a] = v;
        }
        std::size_t rem = s;
        for (int r = k - 1; r >= 0; --r) {
          const double sr = (static_cast<int>(rem % count) - 0.5 * (count - 1)) * h;
          rem /= count;
          for (int a = 0; a < d; ++a) x[a] += B(r, a) * sr;
        }
        sum += phi.interpolate(x);
      }
      slice[j] = sum * scale;
    }
  }
  return out;
}

GridFunction backproject(const PlaneFunction& g, const std::vector<GridAxis>& axes) {
  const auto& design = g.design();
  const int d = design.d();
  const int m = design.m();
  if (static_cast<int>(axes.size()) != d) throw DomainError("reference::backproject: dimension mismatch");
  GridFunction out(axes);
  std::vector<double> x(d), u(m);
  for (std::size_t i = 0; i < design.size(); ++i) {
    const Eigen::MatrixXd& A = design.direction(i);
    for (std::size_t p = 0; p < out.size(); ++p) {
      out.node(p, x);
      for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += A(r, a) * x[a];
        u[r] = s;
      }
      out[p] += design.weight(i) * g.interpolate(i, u);
    }
  }
  return out;
}

}  // namespace kpn::reference
