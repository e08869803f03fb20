#ifndef STRATAHJB_PARALLEL_HPP_
#define STRATAHJB_PARALLEL_HPP_

#include <cstddef>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stratahjb {

// Execution policy for the data-parallel kernels. Every parallel kernel has a
// serial twin; results must be bit-identical because each index writes its own
// slot and reductions are done in index order afterwards.
enum class Exec { Serial, OpenMP };

// Thread cap from STRATAHJB_THREADS (0 or unset means "all available").
inline int thread_cap() {
  const char* env = std::getenv("STRATAHJB_THREADS");
  if (env == nullptr) return 0;
  const int n = std::atoi(env);
  return n > 0 ? n : 0;
}

template <typename Fn>
void parallel_for(std::size_t n, Exec exec, Fn&& fn) {
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  const int cap = thread_cap();
  if (cap > 0) {
#pragma omp parallel for schedule(static) num_threads(cap)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
  }
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

inline Exec default_exec() {
#ifdef _OPENMP
  return Exec::OpenMP;
#else
  return Exec::Serial;
#endif
}

}  // namespace stratahjb

#endif  // STRATAHJB_PARALLEL_HPP_
