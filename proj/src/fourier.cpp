#include "kpn/fourier.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "kpn/error.hpp"

namespace kpn::fourier {

namespace {

// FFTW's planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> angular_frequencies(int n, double h) {
  std::vector<double> w(n);
  const double base = 2.0 * std::numbers::pi / (n * h);
  for (int j = 0; j < n; ++j) {
    const int jj = (j < (n + 1) / 2) ? j : j - n;
    w[j] = base * jj;
  }
  return w;
}

void dft(std::vector<cplx>& data, std::span<const int> dims, int sign) {
  std::size_t total = 1;
  for (int n : dims) total *= static_cast<std::size_t>(n);
  if (total != data.size()) throw DomainError("dft: data size does not match dims");
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr,
                         sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericalError("dft: FFTW planning failed");
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

namespace {

// Multiplies entry `flat` by exp(sign * i * xi.x0) where x0 is the first node.
void apply_origin_phase(std::vector<cplx>& data, const std::vector<GridAxis>& axes, int sign) {
  const int d = static_cast<int>(axes.size());
  std::vector<std::vector<cplx>> phase(d);
  for (int a = 0; a < d; ++a) {
    const auto w = angular_frequencies(axes[a].count, axes[a].spacing());
    const double x0 = axes[a].node(0);
    phase[a].resize(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      phase[a][j] = std::polar(1.0, sign * w[j] * x0);
    }
  }
  std::vector<std::size_t> strides(d, 1);
  for (int a = d - 2; a >= 0; --a) strides[a] = strides[a + 1] * axes[a + 1].count;
  for (std::size_t i = 0; i < data.size(); ++i) {
    cplx p = 1.0;
    for (int a = 0; a < d; ++a) p *= phase[a][(i / strides[a]) % axes[a].count];
    data[i] *= p;
  }
}

std::vector<int> dims_of(const std::vector<GridAxis>& axes) {
  std::vector<int> dims;
  for (const auto& ax : axes) dims.push_back(ax.count);
  return dims;
}

}  // namespace

std::vector<cplx> continuous_ft(const GridFunction& f) {
  std::vector<cplx> data(f.values().begin(), f.values().end());
  const auto dims = dims_of(f.axes());
  dft(data, dims, -1);
  apply_origin_phase(data, f.axes(), -1);
  const double vol = f.cell_volume();
  for (auto& z : data) z *= vol;
  return data;
}

GridFunction continuous_ift(const std::vector<GridAxis>& axes, std::vector<cplx> spectrum,
                            double* imag_residue) {
  apply_origin_phase(spectrum, axes, +1);
  const auto dims = dims_of(axes);
  dft(spectrum, dims, +1);
  double period_volume = 1.0;
  for (const auto& ax : axes) period_volume *= ax.count * ax.spacing();
  GridFunction out(axes);
  double residue = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const cplx z = spectrum[i] / period_volume;
    out[i] = z.real();
    residue = std::max(residue, std::abs(z.imag()));
  }
  if (imag_residue != nullptr) *imag_residue = residue;
  return out;
}

GridFunction continuous_ift_extended(
    const std::vector<GridAxis>& axes,
    const std::function<std::complex<long double>(std::span<const long double>)>& fhat,
    double* imag_residue) {
  using lcplx = std::complex<long double>;
  const int d = static_cast<int>(axes.size());
  const auto dims = dims_of(axes);
  std::vector<std::size_t> strides(d, 1);
  for (int a = d - 2; a >= 0; --a) strides[a] = strides[a + 1] * axes[a + 1].count;
  std::vector<std::vector<long double>> w(d);
  std::vector<std::vector<lcplx>> phase(d);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    const int n = axes[a].count;
    const long double X = axes[a].extent;
    const long double h = 2.0L * X / (n - 1);
    w[a].resize(n);
    phase[a].resize(n);
    for (int j = 0; j < n; ++j) {
      const int jj = (j < (n + 1) / 2) ? j : j - n;
      w[a][j] = 2.0L * std::numbers::pi_v<long double> * jj / (n * h);
      phase[a][j] = std::polar(1.0L, -w[a][j] * X);
    }
    total *= static_cast<std::size_t>(n);
  }

  std::vector<lcplx> data(total);
  const std::ptrdiff_t nt = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel
  {
    std::vector<long double> xi(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < nt; ++i) {
      lcplx p = 1.0L;
      for (int a = 0; a < d; ++a) {
        const std::size_t j = (i / strides[a]) % axes[a].count;
        xi[a] = w[a][j];
        p *= phase[a][j];
      }
      data[i] = fhat(xi) * p;
    }
  }

  auto* ptr = reinterpret_cast<fftwl_complex*>(data.data());
  fftwl_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftwl_plan_dft(d, dims.data(), ptr, ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw NumericalError("continuous_ift_extended: FFTW planning failed");
  fftwl_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftwl_destroy_plan(plan);
  }

  long double period_volume = 1.0L;
  for (const auto& ax : axes) period_volume *= 2.0L * ax.extent * ax.count / (ax.count - 1);
  GridFunction out(axes);
  double residue = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const lcplx z = data[i] / period_volume;
    out[i] = static_cast<double>(z.real());
    residue = std::max(residue, static_cast<double>(std::abs(z.imag())));
  }
  if (imag_residue != nullptr) *imag_residue = residue;
  return out;
}

std::vector<cplx> sample_spectrum(const std::vector<GridAxis>& axes,
                                  const std::function<cplx(std::span<const double>)>& fhat) {
  const int d = static_cast<int>(axes.size());
  std::vector<std::vector<double>> w(d);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) {
    w[a] = angular_frequencies(axes[a].count, axes[a].spacing());
    total *= axes[a].count;
  }
  std::vector<std::size_t> strides(d, 1);
  for (int a = d - 2; a >= 0; --a) strides[a] = strides[a + 1] * axes[a + 1].count;
  std::vector<cplx> out(total);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel
  {
    std::vector<double> xi(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      for (int a = 0; a < d; ++a) xi[a] = w[a][(i / strides[a]) % axes[a].count];
      out[i] = fhat(xi);
    }
  }
  return out;
}

std::vector<double> radial_multiplier(std::span<const double> values,
                                      const std::vector<GridAxis>& axes,
                                      const std::function<double(double)>& multiplier, int pad) {
  const int d = static_cast<int>(axes.size());
  if (pad < 1) throw DomainError("radial_multiplier: pad must be >= 1");
  std::vector<int> dims(d), padded(d);
  std::size_t total = 1, padded_total = 1;
  for (int a = 0; a < d; ++a) {
    dims[a] = axes[a].count;
    padded[a] = axes[a].count * pad;
    total *= dims[a];
    padded_total *= padded[a];
  }
  if (values.size() != total) throw DomainError("radial_multiplier: size mismatch");

  std::vector<std::size_t> s_in(d, 1), s_pad(d, 1);
  for (int a = d - 2; a >= 0; --a) {
    s_in[a] = s_in[a + 1] * dims[a + 1];
    s_pad[a] = s_pad[a + 1] * padded[a + 1];
  }
  auto padded_index = [&](std::size_t i) {
    std::size_t j = 0;
    for (int a = 0; a < d; ++a) j += ((i / s_in[a]) % dims[a]) * s_pad[a];
    return j;
  };

  std::vector<cplx> data(padded_total, cplx(0.0));
  for (std::size_t i = 0; i < total; ++i) data[padded_index(i)] = values[i];
  dft(data, padded, -1);

  std::vector<std::vector<double>> w(d);
  for (int a = 0; a < d; ++a) w[a] = angular_frequencies(padded[a], axes[a].spacing());
  for (std::size_t i = 0; i < padded_total; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double wa = w[a][(i / s_pad[a]) % padded[a]];
      r2 += wa * wa;
    }
    data[i] *= multiplier(std::sqrt(r2));
  }
  dft(data, padded, +1);

  std::vector<double> out(total);
  const double norm = 1.0 / static_cast<double>(padded_total);
  for (std::size_t i = 0; i < total; ++i) out[i] = data[padded_index(i)].real() * norm;
  return out;
}

std::vector<double> bandlimited_power_kernel(int count, double h, int power) {
  if (power < 0) throw DomainError("bandlimited_power_kernel: power must be >= 0");
  const double W = std::numbers::pi / h;
  std::vector<double> k(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    if (n == 0) {
      k[0] = std::pow(W, power + 1) / (power + 1) / std::numbers::pi;
      continue;
    }
    // C_j = \int_0^W w^j cos(w t), S_j = \int_0^W w^j sin(w t) at W t = n pi.
    const double t = n * h;
    const double cosWt = (n % 2 == 0) ? 1.0 : -1.0;
    double C = 0.0;
    double S = (1.0 - cosWt) / t;
    double Wj = 1.0;
    for (int j = 1; j <= power; ++j) {
      Wj *= W;
      const double Cn = -(j / t) * S;
      const double Sn = -Wj * cosWt / t + (j / t) * C;
      C = Cn;
      S = Sn;
    }
    k[n] = C / std::numbers::pi;
  }
  return k;
}

std::vector<double> bandlimited_power_filter(std::span<const double> values, double h, int power) {
  const int n = static_cast<int>(values.size());
  if (n < 1) return {};
  const int L = 2 * n;
  const auto kern = bandlimited_power_kernel(n, h, power);
  std::vector<cplx> a(L, cplx(0.0)), b(L, cplx(0.0));
  for (int i = 0; i < n; ++i) a[i] = values[i];
  b[0] = kern[0];
  for (int i = 1; i < n; ++i) {
    b[i] = kern[i];
    b[L - i] = kern[i];
  }
  const std::array<int, 1> dims{L};
  dft(a, dims, -1);
  dft(b, dims, -1);
  for (int i = 0; i < L; ++i) a[i] *= b[i];
  dft(a, dims, +1);
  std::vector<double> out(n);
  const double scale = h / L;
  for (int i = 0; i < n; ++i) out[i] = a[i].real() * scale;
  return out;
}

}  // namespace kpn::fourier
