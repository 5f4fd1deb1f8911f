#pragma once

#include <cstddef>
#include <vector>

namespace kpn::parallel {

/// Number of OpenMP threads used by the parallel kernels (1 if OpenMP is off).
int max_threads();
void set_threads(int n);

/// Sum f(0) + ... + f(n-1) with a partition into blocks that does not depend
/// on the thread count, so the rounding is identical for every schedule.
template <class F>
double ordered_sum(std::ptrdiff_t n, F&& f) {
  constexpr std::ptrdiff_t kBlocks = 64;
  if (n <= 0) return 0.0;
  std::vector<double> partial(kBlocks, 0.0);
  const std::ptrdiff_t chunk = (n + kBlocks - 1) / kBlocks;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < kBlocks; ++b) {
    const std::ptrdiff_t lo = b * chunk;
    const std::ptrdiff_t hi = lo + chunk < n ? lo + chunk : n;
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += f(i);
    partial[b] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace kpn::parallel
