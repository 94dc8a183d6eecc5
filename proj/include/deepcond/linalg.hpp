#pragma once

#include <cstddef>
#include <vector>

namespace deepcond {

// Dense symmetric eigensolver: Householder reduction to tridiagonal form
// followed by QL iteration with implicit shifts. Chosen for robustness on
// the small dense matrices this library deals with (n <= 4096).

struct TridiagonalEigen {
    std::vector<double> values;   // ascending
    std::vector<double> first_components;  // first row of the eigenvector matrix
    int max_iterations = 0;       // worst per-eigenvalue iteration count seen
};

// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal d
// and off-diagonal e (e[i] couples i and i+1, e.size() == d.size()-1).
TridiagonalEigen tridiagonal_eigen(std::vector<double> d, std::vector<double> e);

struct SymmetricEigen {
    std::vector<double> values;   // ascending
    int max_iterations = 0;
};

// Eigenvalues of a dense symmetric matrix given in row-major order.
// Throws std::runtime_error with iteration diagnostics on non-convergence.
SymmetricEigen symmetric_eigenvalues(const std::vector<double>& a, int n);

// Cholesky factorization/solve for symmetric positive definite systems,
// with one iterative-refinement pass to recover the last digits.
// Throws std::runtime_error if the matrix is not numerically SPD.
std::vector<double> spd_solve(const std::vector<double>& a, int n,
                              const std::vector<double>& rhs);

}  // namespace deepcond
