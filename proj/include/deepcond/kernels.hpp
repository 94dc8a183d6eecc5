#pragma once

#include <cstddef>
#include <span>

#include "deepcond/parallel.hpp"

namespace deepcond {

// Hot inner loops, each in two variants: a plain serial reference and an
// OpenMP version parallelized over independent output slots. Every output
// element is accumulated by exactly one task in the same order as the serial
// loop, so the two variants are bit-identical; tests and the benchmark
// target rely on that.

// out[i] = f(in[i])
template <class F>
void map_entries_serial(std::span<const double> in, std::span<double> out, F f) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
}

template <class F>
void map_entries(std::span<const double> in, std::span<double> out, F f) {
    const double* src = in.data();
    double* dst = out.data();
    parallel_for(in.size(), [src, dst, &f](std::size_t i) { dst[i] = f(src[i]); });
}

// Gram accumulation: g[i*n+j] = rows i and j of feats (n x m) dotted.
void gram_from_features_serial(const double* feats, int n, int m, double* gram);
void gram_from_features(const double* feats, int n, int m, double* gram);

// h_out[k*n+i] = sum_j w(k, j) * h_in[j*?...]: the layer forward lives in
// network.cpp next to the weight stream; only the generic pieces are here.

}  // namespace deepcond
