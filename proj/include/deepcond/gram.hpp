#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace deepcond {

// Symmetric n x n matrix of pairwise inner products. Stored dense row-major;
// unit_diagonal marks Gram matrices of unit-length inputs.
class GramMatrix {
public:
    GramMatrix() = default;
    GramMatrix(int n, bool unit_diagonal);

    static GramMatrix identity(int n);
    // Unit diagonal, every off-diagonal entry equal to rho.
    static GramMatrix equicorrelated(int n, double rho);
    // Gram of the given unit vectors (rows).
    static GramMatrix from_vectors(const std::vector<std::vector<double>>& rows);
    // Seeded unit-diagonal Gram with max |off-diagonal| == 1 - delta,
    // obtained by shrinking a random Gram toward the identity.
    static GramMatrix synthetic(int n, double delta, std::uint64_t seed);

    int size() const { return n_; }
    bool unit_diagonal() const { return unit_diagonal_; }
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double at(int i, int j) const {
        return a_[static_cast<std::size_t>(i) * n_ + j];
    }
    const std::vector<double>& entries() const { return a_; }
    std::vector<double>& entries() { return a_; }

    double max_abs_off_diagonal() const;
    // Checks symmetry (1e-12), the unit diagonal when flagged, and
    // off-diagonal range. Throws std::runtime_error on violation.
    void validate() const;

    // Unit vectors (rows of the Cholesky factor) whose pairwise inner
    // products reproduce this matrix. Requires positive definiteness.
    std::vector<std::vector<double>> realize_unit_vectors() const;

    // Row-per-line comma-separated full symmetric storage.
    std::string to_csv() const;
    static GramMatrix from_csv(const std::string& text);
    // {"n": ..., "unitDiagonal": ..., "entries": [row-major]}
    std::string to_json() const;
    static GramMatrix from_json(const std::string& text);

    static GramMatrix load(const std::string& path);

private:
    int n_ = 0;
    bool unit_diagonal_ = false;
    std::vector<double> a_;
};

}  // namespace deepcond
