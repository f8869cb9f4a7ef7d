#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfdvc {

// Execution policy for the hot kernels. Parallel paths partition work over
// disjoint output ranges and reduce in a fixed order, so both policies
// produce bit-identical results; Serial is kept as the reference path for
// testing and benchmarking.
enum class Exec { Serial, Parallel };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(i) for i in [0, n). Iterations must be independent.
template <typename Fn>
void parallel_for(Exec exec, int64_t n, Fn&& fn) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (int64_t i = 0; i < n; ++i) fn(i);
  }
}

// Bounded-width variant used by the experiment grid (--jobs N).
template <typename Fn>
void parallel_for_jobs(int jobs, int64_t n, Fn&& fn) {
  if (jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (int64_t i = 0; i < n; ++i) fn(i);
  } else {
    for (int64_t i = 0; i < n; ++i) fn(i);
  }
}

}  // namespace rfdvc
