#include "deepcond/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deepcond {

namespace {

constexpr double kRhoSlack = 1e-9;

double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double clamp_rho(double rho) {
    if (std::abs(rho) > 1.0 + kRhoSlack) {
        throw std::domain_error("dual: correlation outside [-1, 1]");
    }
    return std::clamp(rho, -1.0, 1.0);
}

QuadratureRule expansion_rule(const ActivationSpec& spec, double gamma,
                              int order) {
    if (spec.kinks.empty()) return gauss_hermite_rule(order);
    std::vector<double> scaled;
    const double root_gamma = std::sqrt(gamma);
    for (double k : spec.kinks) scaled.push_back(k / root_gamma);
    return gaussian_panel_rule(scaled);
}

HermiteExpansion expand_spec(const ActivationSpec& spec, int degree,
                             double gamma, int order) {
    QuadratureRule rule = expansion_rule(spec, gamma, order);
    return expand([&spec](double u) { return spec(u); }, degree, gamma, rule);
}

}  // namespace

void DualActivation::finalize() {
    second_moment_ = tail_mass_;
    for (double bi : b_) second_moment_ += bi;

    const double b0 = b_.empty() ? 0.0 : b_[0];
    const double b1 = b_.size() > 1 ? b_[1] : 0.0;
    const double beyond_linear = second_moment_ - b0 - b1;
    linear_ = beyond_linear <= 1e-10 && b0 <= 1e-10;
    affine_ = beyond_linear <= 1e-10;
    mu_ = (linear_ || second_moment_ - b0 <= 1e-12)
              ? 0.0
              : 1.0 - b1 / (second_moment_ - b0);
    mu_tilde_ = 1.0 - b0 - b1;
    derivative_at_one_ = derivative(1.0);
}

DualActivation DualActivation::from_activation(const ActivationSpec& spec,
                                               int degree, int order) {
    HermiteExpansion ex = expand_spec(spec, degree, 1.0, order);
    DualActivation d;
    d.b_.resize(ex.coefficients.size());
    for (std::size_t i = 0; i < ex.coefficients.size(); ++i) {
        d.b_[i] = ex.coefficients[i] * ex.coefficients[i];
    }
    d.tail_mass_ = ex.tail_mass;
    if (spec.normalized || spec.square_normalized) {
        double total = d.tail_mass_;
        for (double bi : d.b_) total += bi;
        if (std::abs(total - 1.0) > 1e-6) {
            throw std::runtime_error("dual: activation '" + spec.name +
                                     "' misses its unit second moment");
        }
        // Pin sigma_hat(1) to exactly 1 so depth-wise composition holds the
        // diagonal.
        for (double& bi : d.b_) bi /= total;
        d.tail_mass_ /= total;
    }
    d.closed_ = spec.closed_form_dual;
    d.closed_derivative_ = spec.closed_form_dual_derivative;
    d.source_name_ = spec.name;
    d.finalize();
    return d;
}

DualActivation DualActivation::from_coefficients(std::vector<double> squared,
                                                 double tail_mass) {
    for (double bi : squared) {
        if (bi < 0.0) {
            throw std::domain_error("dual: squared coefficients must be >= 0");
        }
    }
    if (tail_mass < 0.0) throw std::domain_error("dual: tail mass must be >= 0");
    DualActivation d;
    d.b_ = std::move(squared);
    d.tail_mass_ = tail_mass;
    d.source_name_ = "coefficients";
    d.finalize();
    return d;
}

double DualActivation::eval_series(double rho) const {
    rho = clamp_rho(rho);
    double acc = 0.0;
    for (std::size_t i = b_.size(); i-- > 0;) acc = acc * rho + b_[i];
    return acc + tail_mass_ * std::pow(rho, static_cast<int>(b_.size()));
}

double DualActivation::eval(double rho) const {
    rho = clamp_rho(rho);
    return closed_ ? closed_(rho) : eval_series(rho);
}

double DualActivation::derivative_series(double rho) const {
    rho = clamp_rho(rho);
    double acc = 0.0;
    for (std::size_t i = b_.size(); i-- > 1;) acc = acc * rho + i * b_[i];
    const int np1 = static_cast<int>(b_.size());
    return acc + tail_mass_ * np1 * std::pow(rho, np1 - 1);
}

double DualActivation::derivative(double rho) const {
    rho = clamp_rho(rho);
    return closed_derivative_ ? closed_derivative_(rho) : derivative_series(rho);
}

double DualActivation::uncertainty(double rho) const {
    rho = clamp_rho(rho);
    return tail_mass_ * std::pow(std::abs(rho), static_cast<int>(b_.size()));
}

FixedPointResult fixed_point(const DualActivation& d) {
    if (d.affine()) {
        throw std::domain_error("fixed_point: affine activation, every point fixed");
    }
    FixedPointResult out;
    if (d.eval(0.0) <= 1e-12) {
        out.rho_bar = 0.0;
        out.derivative_at_fixed_point = d.derivative(0.0);
        return out;
    }
    const double hi0 = 1.0 - 1e-9;
    auto gap = [&d](double rho) { return d.eval(rho) - rho; };
    if (gap(hi0) >= 0.0) {
        // sigma_hat stays above the diagonal: no interior fixed point.
        out.rho_bar = 1.0;
        out.derivative_at_fixed_point = d.derivative(1.0);
        return out;
    }
    double lo = 0.0, hi = hi0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    out.rho_bar = 0.5 * (lo + hi);
    out.derivative_at_fixed_point = d.derivative(out.rho_bar);
    if (out.derivative_at_fixed_point >= 1.0) {
        throw std::runtime_error(
            "fixed_point: derivative at interior fixed point is not < 1");
    }
    return out;
}

NormTransferMap::NormTransferMap(const ActivationSpec& spec) : spec_(spec) {
    // Hypothesis check on a grid: odd, non-decreasing, concave on positives.
    bool odd = true, monotone = true, concave = true;
    const double h = 1e-4;
    for (int i = 1; i <= 60; ++i) {
        double u = 6.0 * i / 60.0;
        if (std::abs(spec_(u) + spec_(-u)) > 1e-8) odd = false;
        if (spec_(u + h) - spec_(u - h) < -1e-12) monotone = false;
        if (spec_(-u - h) - spec_(-u + h) > 1e-12) monotone = false;
        double second = spec_(u + h) - 2.0 * spec_(u) + spec_(u - h);
        if (second > 1e-9 * h) concave = false;
    }
    hypothesis_ok_ = odd && monotone && concave && std::abs(spec_(0.0)) < 1e-8;
    alpha_ = std::min(2.0 * eval(0.5) - 1.0, 1.0 - derivative(1.0));
}

double NormTransferMap::eval(double gamma) const {
    if (gamma < 0.0) throw std::domain_error("norm transfer: gamma must be >= 0");
    if (gamma == 0.0) {
        double v = spec_(0.0);
        return v * v;
    }
    QuadratureRule rule = expansion_rule(spec_, gamma, kDefaultQuadratureOrder);
    const double root_gamma = std::sqrt(gamma);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double s = spec_(root_gamma * rule.nodes[i]);
        acc += rule.weights[i] * s * s;
    }
    return acc;
}

double NormTransferMap::derivative(double gamma) const {
    if (gamma <= 0.0) throw std::domain_error("norm transfer: gamma must be > 0");
    QuadratureRule rule = expansion_rule(spec_, gamma, kDefaultQuadratureOrder);
    const double root_gamma = std::sqrt(gamma);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double z = root_gamma * rule.nodes[i];
        acc += rule.weights[i] * spec_(z) * spec_.derivative(z) * rule.nodes[i] /
               root_gamma;
    }
    return acc;
}

NormTransferMap norm_transfer(const ActivationSpec& spec) {
    return NormTransferMap(spec);
}

double dot_product_map(const ActivationSpec& spec, double gx, double gy,
                       double rho, int degree) {
    if (gx < 0.05 || gx > 20.0 || gy < 0.05 || gy > 20.0) {
        throw std::domain_error("dot_product_map: squared norms outside [0.05, 20]");
    }
    rho = clamp_rho(rho);
    HermiteExpansion ex = expand_spec(spec, degree, gx, kDefaultQuadratureOrder);
    HermiteExpansion ey = expand_spec(spec, degree, gy, kDefaultQuadratureOrder);
    double acc = 0.0;
    for (int j = degree; j >= 0; --j) {
        acc = acc * rho + ex.coefficients[j] * ey.coefficients[j];
    }
    return acc;
}

NormReluConstants normrelu_constants(double c) {
    if (c < -10.0 || c > 10.0) {
        throw std::domain_error("normrelu: c must be in [-10, 10]");
    }
    NormReluConstants k;
    const double phi = gaussian_pdf(c);
    const double Phi = gaussian_cdf(c);
    k.b = (1.0 - Phi) * c - phi;
    k.lambda = 1.0 / std::sqrt((1.0 - Phi) * Phi * c * c +
                               (1.0 - 2.0 * Phi) * phi * c +
                               (1.0 - Phi - phi * phi));
    k.mu = 1.0 - k.lambda * k.lambda * (1.0 - Phi) * (1.0 - Phi);
    return k;
}

double normrelu_norm_transfer(double gamma, double c) {
    if (gamma <= 0.0) throw std::domain_error("normrelu: gamma must be > 0");
    NormReluConstants k = normrelu_constants(c);
    const double t = c / std::sqrt(gamma);
    double core = (c * c + gamma - 2.0 * c * k.b) * (1.0 - gaussian_cdf(t)) +
                  (2.0 * k.b - c) * std::sqrt(gamma) * gaussian_pdf(t) +
                  k.b * k.b;
    return k.lambda * k.lambda * core;
}

double normrelu_norm_transfer_derivative(double gamma, double c) {
    if (gamma <= 0.0) throw std::domain_error("normrelu: gamma must be > 0");
    NormReluConstants k = normrelu_constants(c);
    const double t = c / std::sqrt(gamma);
    return k.lambda * k.lambda *
           (1.0 - gaussian_cdf(t) + k.b / std::sqrt(gamma) * gaussian_pdf(t));
}

double normrelu_mean_coefficient(double gamma, double c) {
    if (gamma <= 0.0) throw std::domain_error("normrelu: gamma must be > 0");
    NormReluConstants k = normrelu_constants(c);
    const double t = c / std::sqrt(gamma);
    return k.lambda *
           (std::sqrt(gamma) * gaussian_pdf(t) - (1.0 - gaussian_cdf(t)) * c + k.b);
}

double normrelu_bias(double gamma, double c) {
    if (gamma < 0.25 || gamma > 4.0) {
        throw std::domain_error("normrelu_bias: gamma must be in [0.25, 4]");
    }
    double a0 = normrelu_mean_coefficient(gamma, c);
    return a0 * a0 / normrelu_norm_transfer(gamma, c);
}

}  // namespace deepcond
