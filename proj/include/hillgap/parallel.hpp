#pragma once

#include <exception>
#include <mutex>
#include <utility>

namespace hillgap::par {

/// Number of threads sweeps may use. Honors the HILLGAP_THREADS environment
/// variable (clamped to [1, hardware]); falls back to the OpenMP default.
int thread_cap();

enum class Exec { parallel, serial };

/// Runs f(i) for i in [0, n). The parallel path uses OpenMP with dynamic
/// scheduling; the serial path is the reference implementation kept for
/// testing and benchmarking. Work items must be independent. The first
/// exception thrown by any item is rethrown after the loop completes.
template <class F>
void for_n(Exec mode, int n, F&& f) {
    if (mode == Exec::serial || thread_cap() == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex err_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(thread_cap())
    for (int i = 0; i < n; ++i) {
        try {
            f(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

template <class F>
void for_n(int n, F&& f) {
    for_n(Exec::parallel, n, std::forward<F>(f));
}

}  // namespace hillgap::par
