#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ucso {

inline int hardware_workers() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Run f(i) for i in [0, n).  Each iteration must write its result into a
// preallocated slot and draw randomness only from a stream derived from i,
// so the output is identical whatever `workers` is.
template <typename F>
void for_each_replicate(std::size_t n, int workers, F&& f) {
#if defined(_OPENMP)
    if (workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (long long i = 0; i < (long long)n; ++i) f((std::size_t)i);
        return;
    }
#else
    (void)workers;
#endif
    for (std::size_t i = 0; i < n; ++i) f(i);
}

}  // namespace ucso
