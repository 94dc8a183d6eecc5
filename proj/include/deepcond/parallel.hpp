#pragma once

#include <cstddef>
#include <functional>

namespace deepcond {

// Global worker budget for the OpenMP kernels. Defaults to the OpenMP
// runtime's max; DEEPCOND_THREADS overrides it at startup; 1 forces the
// serial reference path everywhere.
int thread_budget();
void set_thread_budget(int threads);

// Runs fn(i) for i in [0, n). Every index owns its outputs exclusively, so
// the parallel schedule produces bit-identical results to the serial loop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Serial twin, kept as the reference implementation for equivalence tests.
void serial_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace deepcond
