#include "fm/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fm {

namespace {
int g_cap = 0;
}

void set_max_threads(int n) {
  g_cap = n > 0 ? n : 0;
#ifdef _OPENMP
  omp_set_num_threads(g_cap > 0 ? g_cap : omp_get_num_procs());
#endif
}

int max_threads() {
#ifdef _OPENMP
  return g_cap > 0 ? g_cap : omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fm
