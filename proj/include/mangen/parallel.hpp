#pragma once

#ifdef MANGEN_HAVE_OPENMP
#include <omp.h>
#endif

namespace mangen::parallel {

inline int max_threads() {
#ifdef MANGEN_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef MANGEN_HAVE_OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace mangen::parallel
