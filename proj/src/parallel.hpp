#pragma once

#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thermal_designs::detail {

// Runs fn(i) for i in [0, n). Every task writes only its own slot, so the
// result never depends on the worker count. The exception of the lowest
// failing index is rethrown.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    if (n <= 0) return;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#ifdef _OPENMP
    const int workers = threads > 0 ? threads : 1;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    (void)threads;
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace thermal_designs::detail
