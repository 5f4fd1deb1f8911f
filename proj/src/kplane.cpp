#include "kpn/kplane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "kpn/error.hpp"
#include "kpn/fourier.hpp"
#include "kpn/stiefel.hpp"

namespace kpn {

void TransformWarnings::merge(const TransformWarnings& other) {
  boundary_decay = boundary_decay || other.boundary_decay;
  extrapolated = extrapolated || other.extrapolated;
  nearest_direction = nearest_direction || other.nearest_direction;
  messages.insert(messages.end(), other.messages.begin(), other.messages.end());
}

// ---------------------------------------------------------------- designs

DirectionDesign::DirectionDesign(int d, int k, std::vector<Eigen::MatrixXd> directions,
                                 std::vector<double> weights)
    : d_(d), k_(k), directions_(std::move(directions)), weights_(std::move(weights)) {
  if (d < 1 || k < 0 || k >= d) throw DomainError("DirectionDesign: need 0 <= k < d");
  if (directions_.empty()) throw DomainError("DirectionDesign: empty design");
  if (directions_.size() != weights_.size()) {
    throw DomainError("DirectionDesign: one weight per direction required");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    const auto& A = directions_[i];
    if (A.rows() != d - k || A.cols() != d) throw DomainError("DirectionDesign: direction shape mismatch");
    if (stiefel_violation(A) > 1e-12) {
      throw DomainError("DirectionDesign: direction " + std::to_string(i) + " is not a Stiefel matrix");
    }
    if (!(weights_[i] >= 0.0)) throw DomainError("DirectionDesign: negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("DirectionDesign: weights must sum to 1");
}

namespace {

Eigen::MatrixXd unit_row(double a, double b) {
  Eigen::MatrixXd A(1, 2);
  A << a, b;
  return A;
}

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / n); }

std::vector<Eigen::Vector3d> fibonacci_points(int n) {
  std::vector<Eigen::Vector3d> pts;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < n; ++j) {
    const double z = 1.0 - (2.0 * j + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * j;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

}  // namespace

DirectionDesign DirectionDesign::half_circle(int n) {
  if (n < 1) throw ConfigError("half_circle: need n >= 1");
  std::vector<Eigen::MatrixXd> dirs;
  for (int j = 0; j < n; ++j) {
    const double th = std::numbers::pi * j / n;
    dirs.push_back(unit_row(std::cos(th), std::sin(th)));
  }
  return DirectionDesign(2, 1, std::move(dirs), uniform_weights(n));
}

DirectionDesign DirectionDesign::full_circle(int n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("full_circle: need an even n >= 2");
  std::vector<Eigen::MatrixXd> dirs;
  for (int j = 0; j < n / 2; ++j) {
    const double th = 2.0 * std::numbers::pi * j / n;
    dirs.push_back(unit_row(std::cos(th), std::sin(th)));
  }
  for (int j = 0; j < n / 2; ++j) dirs.push_back(-dirs[j]);
  return DirectionDesign(2, 1, std::move(dirs), uniform_weights(n));
}

DirectionDesign DirectionDesign::sphere(int n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("sphere: need an even n >= 2");
  std::vector<Eigen::MatrixXd> dirs;
  for (const auto& p : fibonacci_points(n / 2)) dirs.push_back(p.transpose());
  for (int j = 0; j < n / 2; ++j) dirs.push_back(-dirs[j]);
  return DirectionDesign(3, 2, std::move(dirs), uniform_weights(n));
}

DirectionDesign DirectionDesign::plane_frames(int n_normals) {
  if (n_normals < 1) throw ConfigError("plane_frames: need n_normals >= 1");
  const auto group = default_u_samples(2);
  std::vector<Eigen::MatrixXd> dirs;
  for (const auto& p : fibonacci_points(n_normals)) {
    const Eigen::MatrixXd F = null_basis(p.transpose());
    for (const auto& U : group) dirs.push_back(U * F);
  }
  const auto n = dirs.size();
  return DirectionDesign(3, 1, std::move(dirs), uniform_weights(n));
}

DirectionDesign DirectionDesign::signed_permutations(int d) {
  if (d < 1 || d > 4) throw ConfigError("signed_permutations: supported for d in 1..4");
  auto dirs = default_u_samples(d);
  const auto n = dirs.size();
  return DirectionDesign(d, 0, std::move(dirs), uniform_weights(n));
}

DirectionDesign DirectionDesign::standard(int d, int k, int n) {
  if (k == 0) return signed_permutations(d);
  if (d == 2 && k == 1) return half_circle(n);
  if (d == 3 && k == 2) return sphere(n + n % 2);
  if (d == 3 && k == 1) return plane_frames(std::max(1, n / 8));
  throw ConfigError("DirectionDesign::standard: no built-in design for d=" + std::to_string(d) +
                    ", k=" + std::to_string(k));
}

long DirectionDesign::find(const Eigen::MatrixXd& A, double tol) const {
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    if ((directions_[i] - A).norm() <= tol) return static_cast<long>(i);
  }
  return -1;
}

std::size_t DirectionDesign::nearest(const Eigen::MatrixXd& A) const {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < directions_.size(); ++i) {
    const double dist = (directions_[i] - A).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::vector<Eigen::MatrixXd> default_u_samples(int m) {
  if (m < 1 || m > 4) throw ConfigError("default_u_samples: supported for m in 1..4");
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Eigen::MatrixXd> out;
  do {
    for (int signs = 0; signs < (1 << m); ++signs) {
      Eigen::MatrixXd U = Eigen::MatrixXd::Zero(m, m);
      for (int r = 0; r < m; ++r) U(r, perm[r]) = (signs & (1 << r)) ? -1.0 : 1.0;
      out.push_back(U);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// ---------------------------------------------------------------- plane functions

PlaneFunction::PlaneFunction(DirectionDesign design, std::vector<GridAxis> t_axes)
    : design_(std::move(design)), t_axes_(std::move(t_axes)) {
  if (static_cast<int>(t_axes_.size()) != design_.m()) {
    throw DomainError("PlaneFunction: t-grid dimension must equal d - k");
  }
  strides_.assign(t_axes_.size(), 1);
  for (int a = static_cast<int>(t_axes_.size()) - 2; a >= 0; --a) {
    strides_[a] = strides_[a + 1] * static_cast<std::size_t>(t_axes_[a + 1].count);
  }
  slice_size_ = 1;
  for (const auto& ax : t_axes_) {
    if (ax.count < 2 || !(ax.extent > 0.0)) throw DomainError("PlaneFunction: invalid t-axis");
    slice_size_ *= static_cast<std::size_t>(ax.count);
  }
  values_.assign(slice_size_ * design_.size(), 0.0);
}

PlaneFunction::PlaneFunction(DirectionDesign design, std::vector<GridAxis> t_axes,
                             std::vector<double> values)
    : PlaneFunction(std::move(design), std::move(t_axes)) {
  if (values.size() != values_.size()) throw DomainError("PlaneFunction: value array length mismatch");
  values_ = std::move(values);
}

std::span<const double> PlaneFunction::slice(std::size_t i) const {
  return std::span<const double>(values_).subspan(i * slice_size_, slice_size_);
}

std::span<double> PlaneFunction::slice(std::size_t i) {
  return std::span<double>(values_).subspan(i * slice_size_, slice_size_);
}

GridFunction PlaneFunction::slice_function(std::size_t i) const {
  const auto s = slice(i);
  return GridFunction(t_axes_, std::vector<double>(s.begin(), s.end()));
}

double PlaneFunction::interpolate(std::size_t i, std::span<const double> t) const {
  return multilinear(t_axes_, strides_, slice(i), t);
}

std::vector<GridAxis> default_t_axes(const std::vector<GridAxis>& axes, int m) {
  const int d = static_cast<int>(axes.size());
  if (m == d && std::all_of(axes.begin(), axes.end(), [&](const GridAxis& a) { return a == axes[0]; })) {
    return axes;
  }
  double S2 = 0.0;
  double h = std::numeric_limits<double>::infinity();
  for (const auto& ax : axes) {
    S2 += ax.extent * ax.extent;
    h = std::min(h, ax.spacing());
  }
  const int half = static_cast<int>(std::ceil(std::sqrt(S2) / h - 1e-9));
  return uniform_axes(m, 2 * half + 1, half * h);
}

// ---------------------------------------------------------------- transforms

namespace detail {

// In-plane quadrature nodes: the cube [-S, S]^k with step h.
struct PlaneQuadrature {
  int k = 0;
  int count = 1;
  double step = 1.0;
  std::size_t total = 1;

  double node(int j) const { return (j - 0.5 * (count - 1)) * step; }
};

PlaneQuadrature plane_quadrature(const std::vector<GridAxis>& axes, int k) {
  PlaneQuadrature q;
  q.k = k;
  double S2 = 0.0;
  double h = std::numeric_limits<double>::infinity();
  for (const auto& ax : axes) {
    S2 += ax.extent * ax.extent;
    h = std::min(h, ax.spacing());
  }
  if (k > 0) {
    const int half = static_cast<int>(std::ceil(std::sqrt(S2) / h - 1e-9));
    q.count = 2 * half + 1;
    q.step = h;
  }
  for (int a = 0; a < k; ++a) q.total *= static_cast<std::size_t>(q.count);
  return q;
}

void check_transform_inputs(const GridFunction& phi, const DirectionDesign& design,
                            const std::vector<GridAxis>& t_axes) {
  if (phi.dim() != design.d()) throw DomainError("kplane_transform: grid and design dimensions differ");
  if (static_cast<int>(t_axes.size()) != design.m()) {
    throw DomainError("kplane_transform: t-grid dimension must equal d - k");
  }
}

// Integral of phi over {x : A x = t}, where x0 = A^T t and B spans the null space.
double plane_integral(const GridFunction& phi, const PlaneQuadrature& q, const Eigen::MatrixXd& B,
                      std::span<const double> x0, std::span<double> x) {
  const int d = phi.dim();
  double sum = 0.0;
  for (std::size_t s = 0; s < q.total; ++s) {
    std::size_t rem = s;
    for (int a = 0; a < d; ++a) x[a] = x0[a];
    for (int r = q.k - 1; r >= 0; --r) {
      const double sr = q.node(static_cast<int>(rem % q.count));
      rem /= q.count;
      for (int a = 0; a < d; ++a) x[a] += B(r, a) * sr;
    }
    sum += phi.interpolate(x);
  }
  return sum * std::pow(q.step, q.k);
}

TransformWarnings decay_warnings(const GridFunction& phi) {
  TransformWarnings w;
  const double ratio = phi.boundary_ratio();
  if (ratio > kDecayTolerance) {
    w.boundary_decay = true;
    char buf[128];
    std::snprintf(buf, sizeof buf, "input boundary/peak ratio %.3g exceeds the decay tolerance %.0e", ratio,
                  kDecayTolerance);
    w.messages.push_back(std::string(buf) + "; results carry truncation error");
  }
  return w;
}

TransformWarnings coverage_warnings(const PlaneFunction& g, const std::vector<GridAxis>& axes) {
  TransformWarnings w;
  const auto& design = g.design();
  for (std::size_t i = 0; i < design.size(); ++i) {
    const auto& A = design.direction(i);
    for (int r = 0; r < A.rows(); ++r) {
      double reach = 0.0;
      for (int a = 0; a < A.cols(); ++a) reach += std::abs(A(r, a)) * axes[a].extent;
      if (reach > g.t_axes()[r].extent * (1.0 + 1e-12)) {
        w.extrapolated = true;
      }
    }
  }
  if (w.extrapolated) {
    w.messages.push_back("t-grid does not cover A x for every target node; missing values taken as 0");
  }
  return w;
}

}  // namespace detail

PlaneFunction kplane_transform(const GridFunction& phi, const DirectionDesign& design,
                               const std::vector<GridAxis>& t_axes) {
  detail::check_transform_inputs(phi, design, t_axes);
  const int d = design.d();
  const int m = design.m();
  PlaneFunction out(design, t_axes);
  out.warnings = detail::decay_warnings(phi);
  const auto q = detail::plane_quadrature(phi.axes(), design.k());

  std::vector<Eigen::MatrixXd> null(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    null[i] = design.k() > 0 ? null_basis(design.direction(i)) : Eigen::MatrixXd(0, d);
  }
  const GridFunction t_grid(t_axes);
  const std::size_t per = out.slice_size();
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(per * design.size());
  auto values = out.values();
#pragma omp parallel
  {
    std::vector<double> t(m), x0(d), x(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
      const std::size_t i = static_cast<std::size_t>(idx) / per;
      const std::size_t j = static_cast<std::size_t>(idx) % per;
      t_grid.node(j, t);
      const auto& A = design.direction(i);
      for (int a = 0; a < d; ++a) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += A(r, a) * t[r];
        x0[a] = s;
      }
      values[idx] = detail::plane_integral(phi, q, null[i], x0, x);
    }
  }
  return out;
}

GridFunction backproject(const PlaneFunction& g, const std::vector<GridAxis>& axes,
                         TransformWarnings* warnings) {
  const auto& design = g.design();
  const int d = design.d();
  const int m = design.m();
  if (static_cast<int>(axes.size()) != d) throw DomainError("backproject: target dimension mismatch");
  if (warnings != nullptr) warnings->merge(detail::coverage_warnings(g, axes));
  GridFunction out(axes);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel
  {
    std::vector<double> x(d), u(m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t p = 0; p < n; ++p) {
      out.node(static_cast<std::size_t>(p), x);
      double acc = 0.0;
      for (std::size_t i = 0; i < design.size(); ++i) {
        const auto& A = design.direction(i);
        for (int r = 0; r < m; ++r) {
          double s = 0.0;
          for (int a = 0; a < d; ++a) s += A(r, a) * x[a];
          u[r] = s;
        }
        acc += design.weight(i) * g.interpolate(i, u);
      }
      out[static_cast<std::size_t>(p)] = acc;
    }
  }
  return out;
}

double filter_constant(int d, int k) { return backprojection_constant(d, k) * stiefel_volume(d, k); }

PlaneFunction filter_K(const PlaneFunction& g, const OperatorSpec& spec, int pad) {
  const auto& design = g.design();
  if (spec.d != design.d() || spec.k != design.k()) {
    throw DomainError("filter_K: operator (d, k) does not match the design");
  }
  const int k = spec.k;
  const double c = filter_constant(spec.d, k);
  PlaneFunction out(design, g.t_axes());
  out.warnings = g.warnings;
  if (k == 0) {
    auto src = g.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = c * src[i];
    return out;
  }
  const auto multiplier = [c, k](double w) { return c * std::pow(w, k); };
  const bool line = design.m() == 1;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(design.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto dst = out.slice(i);
    if (line) {
      const auto filtered = fourier::bandlimited_power_filter(g.slice(i), g.t_axes()[0].spacing(), k);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = c * filtered[j];
    } else {
      const auto filtered = fourier::radial_multiplier(g.slice(i), g.t_axes(), multiplier, pad);
      std::copy(filtered.begin(), filtered.end(), dst.begin());
    }
  }
  return out;
}

// ---------------------------------------------------------------- identities

namespace {

// h^d sum_x phi(x) exp(-i xi.x), contracting one axis at a time.
fourier::cplx direct_ft(const GridFunction& phi, std::span<const double> xi,
                        std::vector<fourier::cplx>& buf, std::vector<fourier::cplx>& next) {
  const int d = phi.dim();
  const auto values = phi.values();
  buf.assign(values.begin(), values.end());
  std::size_t len = buf.size();
  for (int a = d - 1; a >= 0; --a) {
    const auto& ax = phi.axis(a);
    const std::size_t n = static_cast<std::size_t>(ax.count);
    std::vector<fourier::cplx> e(n);
    for (std::size_t j = 0; j < n; ++j) e[j] = std::polar(1.0, -xi[a] * ax.node(static_cast<int>(j)));
    const std::size_t outer = len / n;
    next.assign(outer, fourier::cplx(0.0));
    for (std::size_t o = 0; o < outer; ++o) {
      fourier::cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += buf[o * n + j] * e[j];
      next[o] = s;
    }
    buf.swap(next);
    len = outer;
  }
  return buf[0] * phi.cell_volume();
}

}  // namespace

double fourier_slice_residual(const GridFunction& phi, const Eigen::MatrixXd& A,
                              const std::vector<GridAxis>& t_axes) {
  const int d = phi.dim();
  const int m = static_cast<int>(A.rows());
  if (A.cols() != d) throw DomainError("fourier_slice_residual: direction shape mismatch");
  const DirectionDesign single(d, d - m, {A}, {1.0});
  const PlaneFunction R = kplane_transform(phi, single, t_axes);
  const auto lhs = fourier::continuous_ft(R.slice_function(0));

  std::vector<std::vector<double>> w(m);
  for (int a = 0; a < m; ++a) w[a] = fourier::angular_frequencies(t_axes[a].count, t_axes[a].spacing());
  const GridFunction t_grid(t_axes);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lhs.size());
  std::vector<double> err(n), ref(n);
#pragma omp parallel
  {
    std::vector<double> omega(m), xi(d);
    std::vector<fourier::cplx> buf, next;
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      for (int a = 0; a < m; ++a) omega[a] = w[a][(j / t_grid.stride(a)) % t_axes[a].count];
      for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += A(r, c) * omega[r];
        xi[c] = s;
      }
      const fourier::cplx rhs = direct_ft(phi, xi, buf, next);
      err[j] = std::norm(lhs[j] - rhs);
      ref[j] = std::norm(rhs);
    }
  }
  double e = 0.0, r = 0.0;
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    e += err[j];
    r += ref[j];
  }
  return std::sqrt(e / r);
}

double fourier_slice_residual(const GridFunction& phi, const Eigen::MatrixXd& A) {
  return fourier_slice_residual(phi, A, default_t_axes(phi.axes(), static_cast<int>(A.rows())));
}

double fbp_identity_residual(const GridFunction& phi, const OperatorSpec& spec,
                             const DirectionDesign& design, const std::vector<GridAxis>& t_axes,
                             int pad) {
  const PlaneFunction R = kplane_transform(phi, design, t_axes);
  const PlaneFunction KR = filter_K(R, spec, pad);
  GridFunction back = backproject(KR, phi.axes());
  for (std::size_t i = 0; i < back.size(); ++i) back[i] -= phi[i];
  return back.max_abs_central(0.5) / phi.max_abs();
}

PlaneFunction project_iso(const PlaneFunction& g, const std::vector<Eigen::MatrixXd>& u_samples) {
  const auto& design = g.design();
  const int m = design.m();
  if (u_samples.empty()) throw DomainError("project_iso: no group samples");
  for (const auto& U : u_samples) {
    if (U.rows() != m || U.cols() != m || stiefel_violation(U) > 1e-12) {
      throw DomainError("project_iso: group samples must be orthogonal m x m matrices");
    }
  }
  PlaneFunction out(design, g.t_axes());
  out.warnings = g.warnings;

  // Target direction index for every (direction, sample) pair.
  const std::size_t nu = u_samples.size();
  std::vector<std::size_t> target(design.size() * nu);
  for (std::size_t i = 0; i < design.size(); ++i) {
    for (std::size_t u = 0; u < nu; ++u) {
      const Eigen::MatrixXd UA = u_samples[u] * design.direction(i);
      const long j = design.find(UA);
      if (j < 0) {
        out.warnings.nearest_direction = true;
        target[i * nu + u] = design.nearest(UA);
      } else {
        target[i * nu + u] = static_cast<std::size_t>(j);
      }
    }
  }
  if (out.warnings.nearest_direction) {
    out.warnings.messages.push_back("design not closed under the group samples; nearest directions used");
  }

  const GridFunction t_grid(g.t_axes());
  const std::size_t per = g.slice_size();
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(per * design.size());
  auto values = out.values();
#pragma omp parallel
  {
    std::vector<double> t(m), ut(m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
      const std::size_t i = static_cast<std::size_t>(idx) / per;
      t_grid.node(static_cast<std::size_t>(idx) % per, t);
      double acc = 0.0;
      for (std::size_t u = 0; u < nu; ++u) {
        const auto& U = u_samples[u];
        for (int r = 0; r < m; ++r) {
          double s = 0.0;
          for (int c = 0; c < m; ++c) s += U(r, c) * t[c];
          ut[r] = s;
        }
        acc += g.interpolate(target[i * nu + u], ut);
      }
      values[idx] = acc / static_cast<double>(nu);
    }
  }
  return out;
}

PlaneFunction project_iso(const PlaneFunction& g) { return project_iso(g, default_u_samples(g.design().m())); }

double max_abs_difference(const PlaneFunction& a, const PlaneFunction& b) {
  if (a.values().size() != b.values().size()) throw DomainError("max_abs_difference: layout mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace kpn
