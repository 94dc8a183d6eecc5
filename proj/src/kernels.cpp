#include "deepcond/kernels.hpp"

namespace deepcond {

namespace {

inline double dot(const double* a, const double* b, int m) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += a[k] * b[k];
    return s;
}

}  // namespace

void gram_from_features_serial(const double* feats, int n, int m, double* gram) {
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double s = dot(feats + static_cast<std::size_t>(i) * m,
                           feats + static_cast<std::size_t>(j) * m, m);
            gram[static_cast<std::size_t>(i) * n + j] = s;
            gram[static_cast<std::size_t>(j) * n + i] = s;
        }
    }
}

void gram_from_features(const double* feats, int n, int m, double* gram) {
    // One task per upper-triangle entry.
    const std::size_t pairs = static_cast<std::size_t>(n) * (n + 1) / 2;
    parallel_for(pairs, [feats, n, m, gram](std::size_t t) {
        // invert the triangular index
        int i = 0;
        std::size_t base = 0;
        while (base + static_cast<std::size_t>(n - i) <= t) {
            base += n - i;
            ++i;
        }
        int j = i + static_cast<int>(t - base);
        double s = dot(feats + static_cast<std::size_t>(i) * m,
                       feats + static_cast<std::size_t>(j) * m, m);
        gram[static_cast<std::size_t>(i) * n + j] = s;
        gram[static_cast<std::size_t>(j) * n + i] = s;
    });
}

}  // namespace deepcond
