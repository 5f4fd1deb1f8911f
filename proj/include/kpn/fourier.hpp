#pragma once

// Discrete Fourier transforms aligned with the continuous convention
//   f^(xi) = \int f(x) exp(-i xi.x) dx,   f(x) = (2 pi)^{-d} \int f^(xi) exp(i xi.x) dxi.
// Every DFT <-> continuous conversion in the library goes through this header.

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "kpn/grid.hpp"

namespace kpn::fourier {

using cplx = std::complex<double>;

/// Angular frequencies 2 pi j / (n h) in FFT order (j = 0, 1, ..., -1).
std::vector<double> angular_frequencies(int n, double h);

/// Unnormalized multi-dimensional DFT (FFTW, row-major), in place.
/// `sign` = -1 for the forward transform, +1 for the inverse.
void dft(std::vector<cplx>& data, std::span<const int> dims, int sign);

/// Samples of the continuous Fourier transform of `f` at the DFT frequencies
/// of its grid: h^d exp(-i xi.x_0) DFT[f].
std::vector<cplx> continuous_ft(const GridFunction& f);

/// Inverse of continuous_ft: given samples of f^ at the DFT frequencies of
/// `axes`, returns samples of f on the grid. The largest imaginary part is
/// written to `imag_residue` when non-null.
GridFunction continuous_ift(const std::vector<GridAxis>& axes, std::vector<cplx> spectrum,
                            double* imag_residue = nullptr);

/// continuous_ift carried out in long double, for spectra whose synthesis must
/// resolve tails far below double roundoff of the peak.
GridFunction continuous_ift_extended(
    const std::vector<GridAxis>& axes,
    const std::function<std::complex<long double>(std::span<const long double>)>& fhat,
    double* imag_residue = nullptr);

/// Spectrum of f^ evaluated at the DFT frequency grid of `axes`.
std::vector<cplx> sample_spectrum(const std::vector<GridAxis>& axes,
                                  const std::function<cplx(std::span<const double>)>& fhat);

/// Applies the radial Fourier multiplier m(|xi|) to real samples. Each axis is
/// zero-padded by `pad` to suppress wrap-around of slowly decaying outputs.
std::vector<double> radial_multiplier(std::span<const double> values,
                                      const std::vector<GridAxis>& axes,
                                      const std::function<double(double)>& multiplier,
                                      int pad = 2);

/// Linear (non-periodic) convolution of 1D samples with the band-limited
/// kernel of |w|^power, |w| <= pi/h. Equals the multiplier |w|^power applied
/// to the zero-extended band-limited interpolant of the samples, without the
/// wrap-around of a periodic DFT.
std::vector<double> bandlimited_power_filter(std::span<const double> values, double h, int power);

/// Samples k(n h), n = 0..count-1, of the band-limited kernel
/// (2 pi)^{-1} \int_{|w| <= pi/h} |w|^power exp(i w t) dw.
std::vector<double> bandlimited_power_kernel(int count, double h, int power);

}  // namespace kpn::fourier
