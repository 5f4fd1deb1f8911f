#include "kpn/parallel.hpp"

#include <omp.h>

#include "kpn/error.hpp"

namespace kpn::parallel {

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n < 1) throw ConfigError("thread count must be >= 1");
  omp_set_num_threads(n);
}

}  // namespace kpn::parallel
