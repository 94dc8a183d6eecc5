#include "deepcond/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "deepcond/linalg.hpp"

namespace deepcond {

namespace {

void check_basis_args(int j, double gamma) {
    if (gamma <= 0.0) throw std::domain_error("hermite: gamma must be positive");
    if (j < 0) throw std::domain_error("hermite: degree must be non-negative");
    if (j > 200) throw std::domain_error("hermite: degree above 200 not supported");
}

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by Newton
// iteration on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

}  // namespace

void hermite_values(int degree, double x, double gamma, std::vector<double>& out) {
    check_basis_args(degree, gamma);
    out.resize(degree + 1);
    const double t = x / std::sqrt(gamma);
    out[0] = 1.0;
    if (degree == 0) return;
    out[1] = t;
    for (int k = 1; k < degree; ++k) {
        // sqrt(k+1) h_{k+1} = t h_k - sqrt(k) h_{k-1}
        out[k + 1] = (t * out[k] - std::sqrt(double(k)) * out[k - 1]) /
                     std::sqrt(double(k + 1));
    }
}

double hermite_value(int j, double x, double gamma) {
    check_basis_args(j, gamma);
    const double t = x / std::sqrt(gamma);
    double hm = 0.0, h = 1.0;
    for (int k = 0; k < j; ++k) {
        double next = (t * h - std::sqrt(double(k)) * hm) / std::sqrt(double(k + 1));
        hm = h;
        h = next;
    }
    return h;
}

QuadratureRule gauss_hermite_rule(int order) {
    if (order < 1 || order > 512) {
        throw std::domain_error("gauss_hermite_rule: order must be in [1, 512]");
    }
    // Jacobi matrix of the orthonormal recurrence x h_k = sqrt(k+1) h_{k+1}
    // + sqrt(k) h_{k-1}: zero diagonal, off-diagonal sqrt(k).
    std::vector<double> d(order, 0.0), e(order > 1 ? order - 1 : 0);
    for (int k = 1; k < order; ++k) e[k - 1] = std::sqrt(double(k));
    TridiagonalEigen te = tridiagonal_eigen(std::move(d), std::move(e));

    QuadratureRule rule;
    rule.order = order;
    rule.nodes = te.values;
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.weights[i] = te.first_components[i] * te.first_components[i];
    }
    // Symmetrize: the exact rule is invariant under x -> -x.
    for (int i = 0, j = order - 1; i < j; ++i, --j) {
        double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -node;
        rule.nodes[j] = node;
        double weight = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = rule.weights[j] = weight;
    }
    if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

QuadratureRule gaussian_panel_rule(const std::vector<double>& kinks,
                                   double half_range, double max_panel_width,
                                   int points_per_panel) {
    if (half_range <= 0.0 || max_panel_width <= 0.0 || points_per_panel < 2) {
        throw std::domain_error("gaussian_panel_rule: bad parameters");
    }
    std::set<double> cuts = {-half_range, half_range};
    for (double k : kinks) {
        if (k > -half_range && k < half_range) cuts.insert(k);
    }
    std::vector<double> gx, gw;
    gauss_legendre(points_per_panel, gx, gw);

    QuadratureRule rule;
    const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * M_PI);
    auto it = cuts.begin();
    double a = *it;
    for (++it; it != cuts.end(); ++it) {
        double b = *it;
        int panels = std::max(1, (int)std::ceil((b - a) / max_panel_width));
        for (int p = 0; p < panels; ++p) {
            double pa = a + (b - a) * p / panels;
            double pb = a + (b - a) * (p + 1) / panels;
            double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
            for (int i = 0; i < points_per_panel; ++i) {
                double x = mid + half * gx[i];
                rule.nodes.push_back(x);
                rule.weights.push_back(half * gw[i] * inv_sqrt2pi *
                                       std::exp(-0.5 * x * x));
            }
        }
        a = b;
    }
    rule.order = static_cast<int>(rule.nodes.size());
    double total = 0.0;
    for (double w : rule.weights) total += w;
    for (double& w : rule.weights) w /= total;
    return rule;
}

HermiteExpansion expand(const std::function<double(double)>& sigma, int degree,
                        double gamma, const QuadratureRule& rule) {
    if (gamma <= 0.0) throw std::domain_error("expand: gamma must be positive");
    if (degree < 0 || degree > 200) {
        throw std::domain_error("expand: degree must be in [0, 200]");
    }
    if (rule.order < 2 * degree) {
        throw std::domain_error(
            "expand: rule order must be at least twice the expansion degree");
    }
    HermiteExpansion ex;
    ex.degree = degree;
    ex.base_variance = gamma;
    ex.coefficients.assign(degree + 1, 0.0);
    const double root_gamma = std::sqrt(gamma);
    std::vector<double> h;
    double second_moment = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = rule.nodes[q];
        const double w = rule.weights[q];
        const double s = sigma(root_gamma * x);
        if (!std::isfinite(s)) {
            throw std::runtime_error("expand: activation not evaluable at node " +
                                     std::to_string(root_gamma * x));
        }
        second_moment += w * s * s;
        hermite_values(degree, x, 1.0, h);
        const double ws = w * s;
        for (int j = 0; j <= degree; ++j) ex.coefficients[j] += ws * h[j];
    }
    ex.second_moment = second_moment;
    double sum_sq = 0.0;
    for (double a : ex.coefficients) sum_sq += a * a;
    ex.tail_mass = std::max(0.0, second_moment - sum_sq);
    return ex;
}

}  // namespace deepcond
