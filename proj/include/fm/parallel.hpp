#pragma once

namespace fm {

// Caps the worker count used by the OpenMP kernels.  0 restores the
// runtime default.  Results are identical for any thread count: every
// parallel task writes to its own pre-allocated slot and reductions run
// serially in fixed order.
void set_max_threads(int n);
int max_threads();

}  // namespace fm
