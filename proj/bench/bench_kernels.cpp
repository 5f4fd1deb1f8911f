// Serial reference kernels against their OpenMP versions.
// Arg(0) runs the reference, Arg(n > 0) the parallel kernel on n threads.

#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "kpn/kplane.hpp"
#include "kpn/network.hpp"
#include "kpn/parallel.hpp"
#include "kpn/stiefel.hpp"

namespace {

using namespace kpn;

GridFunction bump(int n) {
  return GridFunction::sample(uniform_axes(2, n, 6.5), [](std::span<const double> x) {
    return std::exp(-0.5 * ((x[0] - 1.0) * (x[0] - 1.0) + (x[1] - 0.3) * (x[1] - 0.3)));
  });
}

void thread_args(benchmark::internal::Benchmark* b) {
  b->Arg(0);
  for (int t = 1; t <= parallel::max_threads(); t *= 2) b->Arg(t);
  b->Unit(benchmark::kMillisecond);
}

void BM_kplane_transform(benchmark::State& state) {
  const GridFunction phi = bump(128);
  const auto design = DirectionDesign::half_circle(90);
  const auto ta = default_t_axes(phi.axes(), 1);
  const int threads = static_cast<int>(state.range(0));
  if (threads > 0) parallel::set_threads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      benchmark::DoNotOptimize(reference::kplane_transform(phi, design, ta));
    } else {
      benchmark::DoNotOptimize(kplane_transform(phi, design, ta));
    }
  }
}
BENCHMARK(BM_kplane_transform)->Apply(thread_args);

void BM_backproject(benchmark::State& state) {
  const GridFunction phi = bump(128);
  const auto design = DirectionDesign::half_circle(90);
  const PlaneFunction g = kplane_transform(phi, design, default_t_axes(phi.axes(), 1));
  const int threads = static_cast<int>(state.range(0));
  if (threads > 0) parallel::set_threads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      benchmark::DoNotOptimize(reference::backproject(g, phi.axes()));
    } else {
      benchmark::DoNotOptimize(backproject(g, phi.axes()));
    }
  }
}
BENCHMARK(BM_backproject)->Apply(thread_args);

void BM_dictionary_matrix(benchmark::State& state) {
  const OperatorSpec spec{OperatorFamily::fractional_laplacian, 3.0, 3, 1};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<Atom> atoms;
  for (int i = 0; i < 500; ++i) atoms.push_back({0.0, random_stiefel(2, 3, rng()), Eigen::Vector2d(n01(rng), n01(rng))});
  Eigen::MatrixXd X(400, 3);
  for (auto& v : X.reshaped()) v = n01(rng);
  const int threads = static_cast<int>(state.range(0));
  if (threads > 0) parallel::set_threads(threads);
  for (auto _ : state) {
    if (threads == 0) {
      benchmark::DoNotOptimize(reference::dictionary_matrix(spec, atoms, X));
    } else {
      benchmark::DoNotOptimize(dictionary_matrix(spec, atoms, X));
    }
  }
}
BENCHMARK(BM_dictionary_matrix)->Apply(thread_args);

}  // namespace

BENCHMARK_MAIN();
