#include "deepcond/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <exception>
#include <string>

namespace deepcond {

namespace {

int initial_budget() {
    if (const char* env = std::getenv("DEEPCOND_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) return t;
    }
    return omp_get_max_threads();
}

int& budget_ref() {
    static int budget = initial_budget();
    return budget;
}

}  // namespace

int thread_budget() { return budget_ref(); }

void set_thread_budget(int threads) {
    if (threads >= 1) budget_ref() = threads;
}

void serial_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int threads = thread_budget();
    if (threads <= 1 || n < 2) {
        serial_for(n, fn);
        return;
    }
    // Exceptions cannot unwind through the OpenMP region; stash the first one
    // and rethrow once all tasks are done.
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(deepcond_parallel_for_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace deepcond
