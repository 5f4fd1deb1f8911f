#include "kpn/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kpn/error.hpp"
#include "kpn/fourier.hpp"
#include "kpn/parallel.hpp"

namespace kpn {

int degree(const MultiIndex& n) {
  int s = 0;
  for (int v : n) s += v;
  return s;
}

std::string to_string(const MultiIndex& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(n[i]);
  }
  return s + ")";
}

MultiIndex multi_index_from_string(const std::string& s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') {
    throw SchemaError("malformed multi-index key '" + s + "'");
  }
  MultiIndex n;
  std::stringstream ss(s.substr(1, s.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      n.push_back(v);
    } catch (const std::exception&) {
      throw SchemaError("malformed multi-index key '" + s + "'");
    }
  }
  return n;
}

std::vector<MultiIndex> enumerate_multi_indices(int d, int n_max) {
  std::vector<MultiIndex> out;
  if (d < 1) throw DomainError("enumerate_multi_indices: d must be >= 1");
  for (int deg = 0; deg <= n_max; ++deg) {
    // Lexicographic ascending enumeration of compositions of `deg` into d parts.
    MultiIndex n(d, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == d - 1) {
        n[pos] = remaining;
        out.push_back(n);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        n[pos] = v;
        rec(pos + 1, remaining - v);
      }
    };
    rec(0, deg);
  }
  return out;
}

double monomial_eval(const MultiIndex& n, std::span<const double> x) {
  if (n.size() != x.size()) throw DomainError("monomial_eval: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (int p = 1; p <= n[i]; ++p) v *= x[i] / p;
  }
  return v;
}

PolyCoeffs::PolyCoeffs(int d, int degree)
    : d_(d), degree_(degree), basis_(enumerate_multi_indices(d, degree)) {
  coeffs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
}

PolyCoeffs::PolyCoeffs(int d, int degree, Eigen::VectorXd coeffs) : PolyCoeffs(d, degree) {
  if (coeffs.size() != coeffs_.size()) throw DomainError("PolyCoeffs: coefficient count mismatch");
  coeffs_ = std::move(coeffs);
}

double PolyCoeffs::coefficient(const MultiIndex& n) const {
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i] == n) return coeffs_[static_cast<Eigen::Index>(i)];
  }
  return 0.0;
}

void PolyCoeffs::set_coefficient(const MultiIndex& n, double value) {
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i] == n) {
      coeffs_[static_cast<Eigen::Index>(i)] = value;
      return;
    }
  }
  throw DomainError("PolyCoeffs: multi-index " + to_string(n) + " outside the basis");
}

double PolyCoeffs::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw DomainError("PolyCoeffs: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    s += coeffs_[static_cast<Eigen::Index>(i)] * monomial_eval(basis_[i], x);
  }
  return s;
}

void to_json(nlohmann::json& j, const PolyCoeffs& p) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (std::size_t i = 0; i < p.size(); ++i) {
    coeffs[to_string(p.basis()[i])] = p.coeffs()[static_cast<Eigen::Index>(i)];
  }
  j = nlohmann::json{{"degree", p.degree()}, {"coeffs", coeffs}};
}

PolyCoeffs poly_from_json(const nlohmann::json& j, int d) {
  if (!j.is_object()) throw SchemaError("poly must be an object");
  int deg = 0;
  try {
    deg = j.at("degree").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("poly: ") + e.what());
  }
  if (deg < -1) throw SchemaError("poly: degree must be >= -1");
  PolyCoeffs p(d, deg);
  if (j.contains("coeffs")) {
    if (!j["coeffs"].is_object()) throw SchemaError("poly.coeffs must be an object");
    for (const auto& [key, value] : j["coeffs"].items()) {
      const MultiIndex n = multi_index_from_string(key);
      if (static_cast<int>(n.size()) != d) throw SchemaError("poly: key " + key + " has wrong length");
      if (degree(n) > deg) throw SchemaError("poly: key " + key + " exceeds the degree bound");
      if (!value.is_number()) throw SchemaError("poly: coefficient for " + key + " is not a number");
      p.set_coefficient(n, value.get<double>());
    }
  }
  return p;
}

namespace {

template <class T>
T smooth_step_h(T s) { return s > T(0) ? std::exp(T(-1) / s) : T(0); }

template <class T>
T kappa_hat_impl(T omega, T R0) {
  omega = std::abs(omega);
  if (omega <= R0) return T(1);
  if (omega >= T(1)) return T(0);
  const T s = (T(1) - omega) / (T(1) - R0);
  const T a = smooth_step_h(s);
  const T b = smooth_step_h(T(1) - s);
  return a / (a + b);
}

}  // namespace

double kappa_hat(double omega, double R0) {
  if (!(R0 > 0.0 && R0 <= 0.5)) throw DomainError("kappa_hat: R0 must lie in (0, 1/2]");
  return kappa_hat_impl(omega, R0);
}

CorrectorGrid CorrectorGrid::defaults(int d) {
  switch (d) {
    case 1: return {0.5, 1200.0, 4096};
    case 2: return {0.5, 1000.0, 1024};
    default: return {0.5, 190.0, 160};
  }
}

CorrectorGrid CorrectorGrid::ridge_defaults(int m) {
  switch (m) {
    case 1: return {0.5, 800.0, 1 << 18};
    case 2: return {0.5, 400.0, 1024};
    default: return {0.5, 190.0, 160};
  }
}

void to_json(nlohmann::json& j, const CorrectorGrid& g) {
  j = nlohmann::json{{"R0", g.R0}, {"extent", g.extent}, {"points_per_axis", g.points_per_axis}};
}

void from_json(const nlohmann::json& j, CorrectorGrid& g) {
  g.R0 = j.value("R0", g.R0);
  g.extent = j.value("extent", g.extent);
  g.points_per_axis = j.value("points_per_axis", g.points_per_axis);
}

double PolyCorrector::pair(std::size_t basis_index, std::span<const double> f) const {
  const auto& dual = duals_.at(basis_index);
  if (f.size() != dual.size()) throw DomainError("PolyCorrector::pair: grid mismatch");
  const auto v = dual.values();
  const double s = parallel::ordered_sum(static_cast<std::ptrdiff_t>(f.size()),
                                         [&](std::ptrdiff_t i) { return v[i] * f[i]; });
  return s * dual.cell_volume();
}

Eigen::MatrixXd PolyCorrector::gram() const {
  const auto n = static_cast<Eigen::Index>(basis_.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    PolyCoeffs p(d_, n_L_);
    p.coeffs()[j] = 1.0;
    const GridFunction mono = sample_poly(p, axes_);
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = pair(static_cast<std::size_t>(i), mono.values());
  }
  return G;
}

PolyCorrector build_corrector(int d, int n_L, const CorrectorGrid& grid) {
  if (d < 1 || d > 3) throw ConfigError("build_corrector: supported dimensions are 1..3");
  if (n_L < -1 || n_L > 3) throw ConfigError("build_corrector: n_L must lie in [-1, 3]");
  if (!(grid.R0 > 0.0 && grid.R0 <= 0.5)) throw DomainError("build_corrector: R0 must lie in (0, 1/2]");
  if (grid.points_per_axis < 8 || !(grid.extent > 0.0)) {
    throw ConfigError("build_corrector: need points_per_axis >= 8 and extent > 0");
  }

  PolyCorrector c;
  c.d_ = d;
  c.n_L_ = n_L;
  c.grid_ = grid;
  c.axes_ = uniform_axes(d, grid.points_per_axis, grid.extent);
  c.basis_ = enumerate_multi_indices(d, n_L);

  const double h = c.axes_[0].spacing();
  if (!(std::numbers::pi / h > 1.0)) {
    throw ConfigError("build_corrector: grid spacing too coarse; Nyquist frequency pi/h = " +
                      std::to_string(std::numbers::pi / h) + " must exceed the bump support 1");
  }

  const double R0 = grid.R0;
  for (const auto& n : c.basis_) {
    double residue = 0.0;
    GridFunction dual = fourier::continuous_ift_extended(
        c.axes_, [&](std::span<const long double> xi) {
          long double r2 = 0.0L;
          for (long double v : xi) r2 += v * v;
          const long double kap = kappa_hat_impl<long double>(std::sqrt(r2), R0);
          std::complex<long double> z = kap;
          if (kap == 0.0L) return z;
          for (int a = 0; a < d; ++a) {
            for (int p = 0; p < n[a]; ++p) z *= std::complex<long double>(0.0L, -xi[a]);
          }
          return z;
        },
        &residue);
    const double peak = dual.max_abs();
    c.imag_residue_ = std::max(c.imag_residue_, peak > 0 ? residue / peak : residue);
    c.edge_ratio_ = std::max(c.edge_ratio_, dual.boundary_ratio());
    c.duals_.push_back(std::move(dual));
  }
  if (c.imag_residue_ > 1e-10) {
    throw ConfigError("build_corrector: imaginary residue " + std::to_string(c.imag_residue_) +
                      " exceeds 1e-10");
  }
  if (c.edge_ratio_ > 1e-8) {
    throw ConfigError("build_corrector: extent too small, dual basis edge/peak ratio " +
                      std::to_string(c.edge_ratio_) + " exceeds 1e-8");
  }
  return c;
}

PolyCorrector build_corrector(int d, int n_L) {
  return build_corrector(d, n_L, CorrectorGrid::defaults(d));
}

PolyCoeffs project_poly(const PolyCorrector& corrector, const GridFunction& f) {
  if (f.axes() != corrector.axes()) throw DomainError("project_poly: grid mismatch");
  PolyCoeffs p(corrector.dim(), corrector.n_L());
  for (std::size_t i = 0; i < corrector.basis().size(); ++i) {
    p.coeffs()[static_cast<Eigen::Index>(i)] = corrector.pair(i, f.values());
  }
  return p;
}

GridFunction sample_poly(const PolyCoeffs& p, const std::vector<GridAxis>& axes) {
  return GridFunction::sample(axes, [&](std::span<const double> x) { return p(x); });
}

}  // namespace kpn
