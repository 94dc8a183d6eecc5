#include "deepcond/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace deepcond {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

// QL iteration with implicit shifts on a tridiagonal matrix (d, e).
// If z is non-null it must point to rows*n accumulated-transform storage
// (row-major); the rotations are applied to its columns.
// Returns the worst per-eigenvalue iteration count.
int ql_implicit(std::vector<double>& d, std::vector<double>& e, double* z,
                int rows) {
    const int n = static_cast<int>(d.size());
    if (n <= 1) return 0;
    e.push_back(0.0);  // sentinel
    int worst = 0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-15 * dd) break;
            }
            if (m != l) {
                if (++iter == 80) {
                    throw std::runtime_error(
                        "tridiagonal QL failed to converge after 80 iterations "
                        "at eigenvalue index " + std::to_string(l));
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (z) {
                        for (int k = 0; k < rows; ++k) {
                            double zi1 = z[k * n + i + 1];
                            double zi = z[k * n + i];
                            z[k * n + i + 1] = s * zi + c * zi1;
                            z[k * n + i] = c * zi - s * zi1;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
        worst = std::max(worst, iter);
    }
    e.pop_back();
    return worst;
}

}  // namespace

TridiagonalEigen tridiagonal_eigen(std::vector<double> d, std::vector<double> e) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return {};
    if (e.size() + 1 != d.size()) {
        throw std::invalid_argument("tridiagonal_eigen: e must have size n-1");
    }
    // Track only the first row of the eigenvector matrix; that is all the
    // Golub-Welsch weight formula needs.
    std::vector<double> first(n, 0.0);
    first[0] = 1.0;
    TridiagonalEigen out;
    out.max_iterations = ql_implicit(d, e, first.data(), 1);

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    out.values.resize(n);
    out.first_components.resize(n);
    for (int i = 0; i < n; ++i) {
        out.values[i] = d[idx[i]];
        out.first_components[i] = first[idx[i]];
    }
    return out;
}

SymmetricEigen symmetric_eigenvalues(const std::vector<double>& a, int n) {
    if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n) {
        throw std::invalid_argument("symmetric_eigenvalues: bad dimensions");
    }
    // Householder reduction to tridiagonal form (eigenvalues only, so the
    // transforms are not accumulated).
    std::vector<double> m = a;
    std::vector<double> d(n), e(n, 0.0);
    for (int i = n - 1; i > 0; --i) {
        int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(m[i * n + k]);
            if (scale == 0.0) {
                e[i] = m[i * n + l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    m[i * n + k] /= scale;
                    h += m[i * n + k] * m[i * n + k];
                }
                double f = m[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                m[i * n + l] = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += m[j * n + k] * m[i * n + k];
                    for (int k = j + 1; k <= l; ++k) g += m[k * n + j] * m[i * n + k];
                    e[j] = g / h;
                    f += e[j] * m[i * n + j];
                }
                double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = m[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) {
                        m[j * n + k] -= f * e[k] + g * m[i * n + k];
                    }
                }
            }
        } else {
            e[i] = m[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) d[i] = m[i * n + i];

    std::vector<double> diag(d.begin(), d.end());
    std::vector<double> off(e.begin() + 1, e.end());
    SymmetricEigen out;
    out.max_iterations = ql_implicit(diag, off, nullptr, 0);
    std::sort(diag.begin(), diag.end());
    out.values = std::move(diag);
    return out;
}

std::vector<double> spd_solve(const std::vector<double>& a, int n,
                              const std::vector<double>& rhs) {
    if (a.size() != static_cast<std::size_t>(n) * n ||
        rhs.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("spd_solve: bad dimensions");
    }
    std::vector<double> chol = a;
    for (int j = 0; j < n; ++j) {
        double diag = chol[j * n + j];
        for (int k = 0; k < j; ++k) diag -= chol[j * n + k] * chol[j * n + k];
        if (!(diag > 0.0)) {
            throw std::runtime_error("spd_solve: matrix is not positive definite");
        }
        chol[j * n + j] = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double s = chol[i * n + j];
            for (int k = 0; k < j; ++k) s -= chol[i * n + k] * chol[j * n + k];
            chol[i * n + j] = s / chol[j * n + j];
        }
    }
    auto solve_with_factor = [&](const std::vector<double>& b) {
        std::vector<double> y(n), x(n);
        for (int i = 0; i < n; ++i) {
            double s = b[i];
            for (int k = 0; k < i; ++k) s -= chol[i * n + k] * y[k];
            y[i] = s / chol[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n; ++k) s -= chol[k * n + i] * x[k];
            x[i] = s / chol[i * n + i];
        }
        return x;
    };
    std::vector<double> x = solve_with_factor(rhs);
    // One refinement pass.
    std::vector<double> residual(n);
    for (int i = 0; i < n; ++i) {
        double s = rhs[i];
        for (int k = 0; k < n; ++k) s -= a[i * n + k] * x[k];
        residual[i] = s;
    }
    std::vector<double> corr = solve_with_factor(residual);
    for (int i = 0; i < n; ++i) x[i] += corr[i];
    return x;
}

}  // namespace deepcond
