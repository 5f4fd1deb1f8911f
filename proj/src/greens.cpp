#include "kpn/greens.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "kpn/error.hpp"
#include "kpn/fourier.hpp"
#include "kpn/parallel.hpp"

namespace kpn {

std::string to_string(GreensBranch b) {
  return b == GreensBranch::power ? "power" : "power_log";
}

GreensConstant greens_constant(double alpha, int m) {
  if (m < 1) throw DomainError("greens_constant: m must be >= 1");
  if (!(alpha > m)) {
    throw DomainError("greens_constant: pointwise Green's function undefined for alpha <= m (alpha=" +
                      std::to_string(alpha) + ", m=" + std::to_string(m) + ")");
  }
  const double pi = std::numbers::pi;
  const double excess = alpha - m;
  const double half = std::round(excess / 2.0);
  GreensConstant c;
  if (half >= 1.0 && std::abs(excess - 2.0 * half) < 1e-12) {
    const int mp = static_cast<int>(half);
    c.branch = GreensBranch::power_log;
    c.m_prime = mp;
    const double sign = (mp % 2 == 1) ? 1.0 : -1.0;  // (-1)^{1+m'}
    c.constant = sign / (std::pow(2.0, 2 * mp + m - 1) * std::pow(pi, 0.5 * m) *
                         std::tgamma(mp + 0.5 * m) * std::tgamma(mp + 1.0));
  } else {
    c.branch = GreensBranch::power;
    c.constant = std::tgamma(0.5 * (m - alpha)) /
                 (std::pow(2.0, alpha) * std::pow(pi, 0.5 * m) * std::tgamma(0.5 * alpha));
  }
  return c;
}

GreensProfile make_profile(double alpha, int m) {
  const GreensConstant c = greens_constant(alpha, m);
  return GreensProfile{m, alpha, c.branch, c.constant, c.m_prime};
}

GreensProfile make_profile(const OperatorSpec& spec) { return make_profile(spec.alpha, spec.m()); }

double rho_radial(const GreensProfile& p, double r) {
  if (r == 0.0) return 0.0;
  if (p.branch == GreensBranch::power) return p.constant * std::pow(r, p.alpha - p.m);
  return p.constant * std::pow(r, 2 * p.m_prime) * std::log(r);
}

double rho(const GreensProfile& p, std::span<const double> t) {
  if (static_cast<int>(t.size()) != p.m) throw DomainError("rho: argument dimension mismatch");
  double r2 = 0.0;
  for (double v : t) r2 += v * v;
  return rho_radial(p, std::sqrt(r2));
}

double rho_gradient_scale(const GreensProfile& p, double r) {
  if (r == 0.0) return 0.0;
  if (p.branch == GreensBranch::power) {
    const double q = p.alpha - p.m;
    return p.constant * q * std::pow(r, q - 2.0);
  }
  const int two_mp = 2 * p.m_prime;
  return p.constant * std::pow(r, two_mp - 2) * (two_mp * std::log(r) + 1.0);
}

std::string to_string(ActivationAlias a) {
  switch (a) {
    case ActivationAlias::none: return "none";
    case ActivationAlias::relu: return "relu";
    case ActivationAlias::abs_half: return "abs_half";
    case ActivationAlias::norm: return "norm";
  }
  return "none";
}

ActivationAlias activation_alias_from_string(const std::string& s) {
  if (s == "none" || s.empty()) return ActivationAlias::none;
  if (s == "relu") return ActivationAlias::relu;
  if (s == "abs_half") return ActivationAlias::abs_half;
  if (s == "norm") return ActivationAlias::norm;
  throw SchemaError("unknown activation alias '" + s + "'");
}

void check_alias(const GreensProfile& p, ActivationAlias alias) {
  switch (alias) {
    case ActivationAlias::none: return;
    case ActivationAlias::relu:
    case ActivationAlias::abs_half:
      if (p.m == 1 && p.alpha == 2.0) return;
      throw DomainError("alias '" + to_string(alias) + "' requires alpha = 2 and m = 1");
    case ActivationAlias::norm:
      if (p.branch == GreensBranch::power && std::abs(p.alpha - p.m - 1.0) < 1e-12) return;
      throw DomainError("alias 'norm' requires alpha = m + 1");
  }
}

double Activation::operator()(std::span<const double> u) const {
  switch (alias) {
    case ActivationAlias::none: return rho(profile, u);
    case ActivationAlias::relu: return u[0] > 0.0 ? u[0] : 0.0;
    case ActivationAlias::abs_half: return 0.5 * std::abs(u[0]);
    case ActivationAlias::norm: {
      double r2 = 0.0;
      for (double v : u) r2 += v * v;
      return std::sqrt(r2);
    }
  }
  return 0.0;
}

void Activation::gradient(std::span<const double> u, std::span<double> grad) const {
  double r2 = 0.0;
  for (double v : u) r2 += v * v;
  const double r = std::sqrt(r2);
  switch (alias) {
    case ActivationAlias::none: {
      const double s = rho_gradient_scale(profile, r);
      for (std::size_t i = 0; i < u.size(); ++i) grad[i] = s * u[i];
      return;
    }
    case ActivationAlias::relu: grad[0] = u[0] > 0.0 ? 1.0 : 0.0; return;
    case ActivationAlias::abs_half: grad[0] = u[0] > 0.0 ? 0.5 : (u[0] < 0.0 ? -0.5 : 0.0); return;
    case ActivationAlias::norm:
      for (std::size_t i = 0; i < u.size(); ++i) grad[i] = r > 0.0 ? u[i] / r : 0.0;
      return;
  }
}

TestFunction gaussian_test_function(int m, const std::vector<GridAxis>& axes, int laplacian_power) {
  if (static_cast<int>(axes.size()) != m) throw DomainError("gaussian_test_function: axes/m mismatch");
  if (laplacian_power < 0 || laplacian_power > 6) {
    throw DomainError("gaussian_test_function: laplacian_power must lie in [0, 6]");
  }
  // (-Delta)^p exp(-s/2) = P(s) exp(-s/2) with s = |x|^2, where one application
  // of -Delta maps P to -(4 s P'' + (2m - 4s) P' + (s - m) P).
  const double md = m;
  std::vector<double> P{1.0};
  for (int it = 0; it < laplacian_power; ++it) {
    std::vector<double> next(P.size() + 1, 0.0);
    for (std::size_t j = 0; j < P.size(); ++j) {
      const double c = P[j];
      const double jd = static_cast<double>(j);
      // 4 s P'': s^j -> 4 j (j-1) s^{j-1}
      if (j >= 1) next[j - 1] -= 4.0 * jd * (jd - 1.0) * c;
      // (2m - 4s) P': s^j -> 2m j s^{j-1} - 4 j s^j
      if (j >= 1) next[j - 1] -= 2.0 * md * jd * c;
      next[j] += 4.0 * jd * c;
      // (s - m) P
      next[j + 1] -= c;
      next[j] += md * c;
    }
    P = std::move(next);
  }
  const double scale = 1.0 / P[0];
  TestFunction tf;
  tf.value_at_origin = 1.0;
  tf.samples = GridFunction::sample(axes, [&](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    double poly = 0.0;
    for (std::size_t j = P.size(); j-- > 0;) poly = poly * s + P[j];
    return scale * poly * std::exp(-0.5 * s);
  });
  return tf;
}

double weak_identity_residual(const GreensProfile& p, const GridFunction& phi, double phi_at_origin,
                              const WeakIdentityOptions& opts) {
  if (phi.dim() != p.m) throw DomainError("weak_identity_residual: test function dimension mismatch");
  const double ratio = phi.boundary_ratio();
  if (ratio > opts.boundary_tolerance) {
    throw ConfigError("weak_identity_residual: test function not contained in the grid (boundary/peak = " +
                      std::to_string(ratio) + ")");
  }
  const double alpha = p.alpha;
  const std::vector<double> Lphi = fourier::radial_multiplier(
      phi.values(), phi.axes(), [alpha](double w) { return w == 0.0 ? 0.0 : std::pow(w, alpha); },
      opts.pad);

  std::vector<double> rho_samples(phi.size());
  {
    const GridFunction r = GridFunction::sample(phi.axes(), [&](std::span<const double> x) {
      return rho(p, x);
    });
    std::copy(r.values().begin(), r.values().end(), rho_samples.begin());
  }
  const double pairing =
      parallel::ordered_sum(static_cast<std::ptrdiff_t>(Lphi.size()),
                            [&](std::ptrdiff_t i) { return rho_samples[i] * Lphi[i]; }) *
      phi.cell_volume();
  return std::abs(pairing - phi_at_origin);
}

std::vector<GridAxis> default_weak_identity_axes(int m) {
  switch (m) {
    case 1: return uniform_axes(1, 4096, 20.0);
    case 2: return uniform_axes(2, 512, 16.0);
    default: return uniform_axes(m, 96, 12.0);
  }
}

int default_test_laplacian_power(double alpha) {
  const double r = std::round(alpha);
  const bool even_integer = std::abs(alpha - r) < 1e-12 && static_cast<long>(r) % 2 == 0;
  return even_integer ? 0 : 4;
}

double weak_identity_residual_default(const GreensProfile& p, int refinement) {
  auto axes = default_weak_identity_axes(p.m);
  for (auto& ax : axes) ax.count *= refinement;
  const TestFunction tf = gaussian_test_function(p.m, axes, default_test_laplacian_power(p.alpha));
  return weak_identity_residual(p, tf.samples, tf.value_at_origin);
}

namespace {

using Polynomial = std::map<MultiIndex, double>;

// Coefficients of prod_i (sum_r A(r, i) z_r)^{n_i} in the monomials z^b.
Polynomial ridge_expansion(const Eigen::MatrixXd& A, const MultiIndex& n) {
  const int m = static_cast<int>(A.rows());
  Polynomial result{{MultiIndex(m, 0), 1.0}};
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (int p = 0; p < n[i]; ++p) {
      Polynomial next;
      for (const auto& [b, c] : result) {
        for (int r = 0; r < m; ++r) {
          const double a = A(r, static_cast<Eigen::Index>(i));
          if (a == 0.0) continue;
          MultiIndex bb = b;
          ++bb[r];
          next[bb] += c * a;
        }
      }
      result = std::move(next);
    }
  }
  return result;
}

}  // namespace

GKernel::GKernel(GreensProfile profile, int d, std::shared_ptr<const PolyCorrector> ridge)
    : profile_(profile), d_(d), ridge_(std::move(ridge)) {
  if (!ridge_) throw DomainError("GKernel: null corrector");
  if (ridge_->dim() != profile_.m) {
    throw DomainError("GKernel: corrector dimension " + std::to_string(ridge_->dim()) +
                      " does not match the plane dimension " + std::to_string(profile_.m));
  }
  if (d_ < profile_.m) throw DomainError("GKernel: d must be >= m");
  basis_ = enumerate_multi_indices(d_, ridge_->n_L());
}

Eigen::VectorXd GKernel::correction(const Eigen::MatrixXd& A, const Eigen::VectorXd& t) const {
  if (A.rows() != profile_.m || A.cols() != d_ || t.size() != profile_.m) {
    throw DomainError("GKernel: (A, t) dimension mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_.size()));
  if (basis_.empty()) return out;

  // <m_b^*, rho(. - t)> on the m-variate grid for every ridge basis element.
  const GridFunction shifted = GridFunction::sample(ridge_->axes(), [&](std::span<const double> u) {
    double r2 = 0.0;
    for (int a = 0; a < profile_.m; ++a) {
      const double v = u[a] - t[a];
      r2 += v * v;
    }
    return rho_radial(profile_, std::sqrt(r2));
  });
  std::map<MultiIndex, double> ridge_pairing;
  for (std::size_t i = 0; i < ridge_->basis().size(); ++i) {
    ridge_pairing[ridge_->basis()[i]] = ridge_->pair(i, shifted.values());
  }

  for (std::size_t j = 0; j < basis_.size(); ++j) {
    double s = 0.0;
    for (const auto& [b, c] : ridge_expansion(A, basis_[j])) s += c * ridge_pairing.at(b);
    out[static_cast<Eigen::Index>(j)] = s;
  }
  return out;
}

double GKernel::evaluate(const Eigen::MatrixXd& A, const Eigen::VectorXd& t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& correction) const {
  if (x.size() != d_) throw DomainError("GKernel: x dimension mismatch");
  if (correction.size() != static_cast<Eigen::Index>(basis_.size())) {
    throw DomainError("GKernel: correction length mismatch");
  }
  const Eigen::VectorXd u = A * x - t;
  double value = rho_radial(profile_, u.norm());
  for (std::size_t j = 0; j < basis_.size(); ++j) {
    value -= correction[static_cast<Eigen::Index>(j)] *
             monomial_eval(basis_[j], std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }
  return value;
}

double GKernel::operator()(const Eigen::MatrixXd& A, const Eigen::VectorXd& t,
                           const Eigen::VectorXd& x) const {
  return evaluate(A, t, x, correction(A, t));
}

double kernel_g(const OperatorSpec& spec, const Eigen::MatrixXd& A, const Eigen::VectorXd& t,
                const Eigen::VectorXd& x, const PolyCorrector& ridge) {
  if (ridge.dim() != spec.m() || ridge.n_L() != spec.n_L()) {
    throw DomainError("kernel_g: corrector built for (m=" + std::to_string(ridge.dim()) +
                      ", n_L=" + std::to_string(ridge.n_L()) + "), operator needs (m=" +
                      std::to_string(spec.m()) + ", n_L=" + std::to_string(spec.n_L()) + ")");
  }
  // Non-owning handle: the kernel does not outlive this call.
  std::shared_ptr<const PolyCorrector> handle(&ridge, [](const PolyCorrector*) {});
  const GKernel g(make_profile(spec), spec.d, handle);
  return g(A, t, x);
}

}  // namespace kpn
