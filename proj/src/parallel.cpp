#include "cr/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace cr {

int worker_count() {
    if (const char* env = std::getenv("CONTACT_REDUCE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return omp_get_max_threads();
}

namespace detail {

void run_parallel(std::ptrdiff_t n, void (*body)(std::ptrdiff_t, void*), void* ctx) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i, ctx);
}

} // namespace detail

} // namespace cr
