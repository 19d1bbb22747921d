#pragma once

// Index loops that run either serially or on an OpenMP team. The serial path is the reference
// the parallel path is benchmarked and tested against.

#include <cstddef>
#include <exception>
#include <mutex>

namespace cr {

enum class Exec { Serial, Parallel };

// Thread count for parallel loops: CONTACT_REDUCE_THREADS when set and positive, else the
// OpenMP default.
int worker_count();

namespace detail {
void run_parallel(std::ptrdiff_t n, void (*body)(std::ptrdiff_t, void*), void* ctx);
}

// Call f(i) for i in [0, n). The first exception thrown by any call is rethrown on return.
template <class F>
void for_each_index(std::size_t n, Exec exec, F&& f) {
    if (exec == Exec::Serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    struct Ctx {
        F* f;
        std::exception_ptr error;
        std::mutex lock;
    } ctx{&f, nullptr, {}};
    detail::run_parallel(
        static_cast<std::ptrdiff_t>(n),
        [](std::ptrdiff_t i, void* p) {
            auto* c = static_cast<Ctx*>(p);
            try {
                (*c->f)(static_cast<std::size_t>(i));
            } catch (...) {
                std::lock_guard<std::mutex> g(c->lock);
                if (!c->error) c->error = std::current_exception();
            }
        },
        &ctx);
    if (ctx.error) std::rethrow_exception(ctx.error);
}

} // namespace cr
