#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "deepcond/gram.hpp"
#include "deepcond/linalg.hpp"
#include "oracles.hpp"

using namespace deepcond;

TEST_CASE("identity eigenvalues") {
    std::vector<double> a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    auto eig = symmetric_eigenvalues(a, 3);
    for (double v : eig.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("2x2 closed form") {
    const double rho = 0.37;
    std::vector<double> a = {1, rho, rho, 1};
    auto eig = symmetric_eigenvalues(a, 2);
    CHECK(eig.values[0] == doctest::Approx(1 - rho).epsilon(1e-13));
    CHECK(eig.values[1] == doctest::Approx(1 + rho).epsilon(1e-13));
}

TEST_CASE("random 5x5 gram matches characteristic-polynomial roots") {
    GramMatrix g = GramMatrix::synthetic(5, 0.2, 42);
    auto eig = symmetric_eigenvalues(g.entries(), 5);
    auto roots = oracle::eigen_by_char_poly(g.entries(), 5);
    REQUIRE(roots.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(std::abs(eig.values[i] - roots[i]) < 1e-8);
    }
}

TEST_CASE("tridiagonal eigen recovers known 2x2") {
    // [[0, 1], [1, 0]]: eigenvalues -1, 1, first components 1/sqrt(2).
    auto te = tridiagonal_eigen({0.0, 0.0}, {1.0});
    CHECK(te.values[0] == doctest::Approx(-1.0));
    CHECK(te.values[1] == doctest::Approx(1.0));
    CHECK(te.first_components[0] * te.first_components[0] == doctest::Approx(0.5));
}

TEST_CASE("spd solve with refinement") {
    const int n = 6;
    GramMatrix g = GramMatrix::synthetic(n, 0.3, 7);
    std::vector<double> x_true(n);
    for (int i = 0; i < n; ++i) x_true[i] = std::sin(i + 1.0);
    std::vector<double> rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) rhs[i] += g.at(i, j) * x_true[j];
    }
    auto x = spd_solve(g.entries(), n, rhs);
    for (int i = 0; i < n; ++i) {
        CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-11));
    }
}

TEST_CASE("spd solve rejects indefinite matrices") {
    std::vector<double> a = {1, 2, 2, 1};
    CHECK_THROWS_AS(spd_solve(a, 2, {1, 1}), std::runtime_error);
}

TEST_CASE("realized unit vectors reproduce their gram matrix") {
    GramMatrix g = GramMatrix::synthetic(6, 0.25, 11);
    auto rows = g.realize_unit_vectors();
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            double dot = 0.0;
            for (int c = 0; c < 6; ++c) dot += rows[i][c] * rows[j][c];
            CHECK(dot == doctest::Approx(g.at(i, j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gram matrices survive their serialization formats") {
    GramMatrix g = GramMatrix::synthetic(5, 0.35, 23);
    GramMatrix via_csv = GramMatrix::from_csv(g.to_csv());
    GramMatrix via_json = GramMatrix::from_json(g.to_json());
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            CHECK(via_csv.at(i, j) == g.at(i, j));    // 17 digits round-trip
            CHECK(via_json.at(i, j) == g.at(i, j));
        }
    }
    CHECK(via_csv.unit_diagonal());
    CHECK_THROWS_AS(GramMatrix::from_csv("1,2\n3\n"), std::runtime_error);
}

TEST_CASE("large well-conditioned eigenproblem stays sane") {
    const int n = 300;
    GramMatrix g = GramMatrix::synthetic(n, 0.5, 3);
    auto eig = symmetric_eigenvalues(g.entries(), n);
    double trace = 0.0;
    for (double v : eig.values) trace += v;
    CHECK(trace == doctest::Approx(n).epsilon(1e-10));
    CHECK(eig.values.front() > 0.0);
}
