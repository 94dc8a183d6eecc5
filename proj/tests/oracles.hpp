// Independent oracles used by the tests. These stay off the library's code
// paths: the eigenvalue oracle goes through the characteristic polynomial,
// the quadrature oracle through raw tensor-grid sums, and the Jacobian
// oracle through finite differences.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Characteristic polynomial coefficients by Faddeev-LeVerrier:
// p(x) = x^n + c[n-1] x^{n-1} + ... + c[0].
inline std::vector<double> char_poly(const std::vector<double>& a, int n) {
    std::vector<double> m(a), c(n + 1, 0.0);
    c[n] = 1.0;
    std::vector<double> work(a.size());
    for (int k = 1; k <= n; ++k) {
        if (k > 1) {
            // M <- A (M + c_{n-k+1} I)
            std::vector<double> shifted = m;
            for (int i = 0; i < n; ++i) shifted[i * n + i] += c[n - k + 1];
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int t = 0; t < n; ++t) s += a[i * n + t] * shifted[t * n + j];
                    work[i * n + j] = s;
                }
            }
            m = work;
        }
        double trace = 0.0;
        for (int i = 0; i < n; ++i) trace += m[i * n + i];
        c[n - k] = -trace / k;
    }
    return c;
}

inline double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
}

// All real roots of the characteristic polynomial of a symmetric matrix,
// located by sign-change bisection on a fine grid inside the Gershgorin
// bound. Test-sized matrices only.
inline std::vector<double> eigen_by_char_poly(const std::vector<double>& a, int n) {
    std::vector<double> c = char_poly(a, n);
    double radius = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(a[i * n + j]);
        radius = std::max(radius, row);
    }
    radius += 1.0;
    const int grid = 400000;
    std::vector<double> roots;
    double prev_x = -radius, prev_v = poly_eval(c, prev_x);
    for (int g = 1; g <= grid; ++g) {
        double x = -radius + 2.0 * radius * g / grid;
        double v = poly_eval(c, x);
        if (prev_v == 0.0) roots.push_back(prev_x);
        if (prev_v * v < 0.0) {
            double lo = prev_x, hi = x;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double vm = poly_eval(c, mid);
                if (vm == 0.0) { lo = hi = mid; break; }
                if (vm * poly_eval(c, lo) < 0.0) hi = mid; else lo = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_v = v;
    }
    return roots;
}

// E[f(Z1, Z2)] for (Z1, Z2) centered Gaussian with Var(Z1)=g1, Var(Z2)=g2,
// Cov=g3, by a tensor product of two one-dimensional rules.
inline double gaussian_2d(const std::function<double(double, double)>& f,
                          double g1, double g2, double g3,
                          const std::vector<double>& nodes,
                          const std::vector<double>& weights) {
    if (g3 * g3 > g1 * g2 + 1e-12) {
        throw std::invalid_argument("gaussian_2d: invalid covariance");
    }
    const double s1 = std::sqrt(g1);
    const double slope = g3 / s1;
    const double resid = std::sqrt(std::max(0.0, g2 - g3 * g3 / g1));
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double z1 = s1 * nodes[i];
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double z2 = slope * nodes[i] + resid * nodes[j];
            acc += weights[i] * weights[j] * f(z1, z2);
        }
    }
    return acc;
}

}  // namespace oracle
