#include "hillgap/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hillgap::par {

static int read_cap() {
#ifdef _OPENMP
    int cap = omp_get_max_threads();
#else
    int cap = 1;
#endif
    if (const char* env = std::getenv("HILLGAP_THREADS")) {
        try {
            const int requested = std::stoi(env);
            if (requested >= 1 && requested < cap) cap = requested;
        } catch (...) {
            // unparseable value: ignore, keep default
        }
    }
    return cap < 1 ? 1 : cap;
}

int thread_cap() {
    static const int cap = read_cap();
    return cap;
}

}  // namespace hillgap::par
