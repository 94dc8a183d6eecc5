#pragma once

#include <string>
#include <vector>

#include "deepcond/activation.hpp"
#include "deepcond/hermite.hpp"

namespace deepcond {

inline constexpr int kDefaultExpansionDegree = 60;
inline constexpr int kDefaultQuadratureOrder = 128;

// The dual of an activation: sigma_hat(rho) = E[sigma(X) sigma(X')] for
// jointly Gaussian (X, X') with correlation rho, represented by the squared
// Hermite coefficients b_i = a_i^2 plus the mass beyond the truncation.
// Series evaluation folds the tail in as tail_mass * rho^(N+1); the result
// is itself a valid dual (non-negative coefficients, same total mass, same
// b_0 and b_1), so every contraction bound applies to it verbatim.
class DualActivation {
public:
    static DualActivation from_activation(
        const ActivationSpec& spec, int degree = kDefaultExpansionDegree,
        int order = kDefaultQuadratureOrder);
    // Direct construction from squared coefficients (testing and synthetic
    // series).
    static DualActivation from_coefficients(std::vector<double> squared,
                                            double tail_mass);

    // sigma_hat(rho). Closed form when the source registered one, series
    // otherwise. |rho| may exceed 1 by at most 1e-9 (clamped); larger values
    // throw std::domain_error.
    double eval(double rho) const;
    double eval_series(double rho) const;

    // sigma_hat'(rho) = sum i b_i rho^(i-1).
    double derivative(double rho) const;
    double derivative_series(double rho) const;

    // Bound on the truncation error of the series value at rho.
    double uncertainty(double rho) const;

    double derivative_at_one() const { return derivative_at_one_; }

    // Coefficient of non-linearity, 1 - sigma_hat'(0)/(sigma_hat(1) -
    // sigma_hat(0)); normalization invariant. Zero with linear() set for
    // linear activations.
    double mu() const { return mu_; }
    bool linear() const { return linear_; }
    // Coefficient of non-affinity, 1 - b_0 - b_1.
    double mu_tilde() const { return mu_tilde_; }
    bool affine() const { return affine_; }

    double second_moment() const { return second_moment_; }  // sigma_hat(1)
    double tail_mass() const { return tail_mass_; }
    int degree() const { return static_cast<int>(b_.size()) - 1; }
    const std::vector<double>& squared_coefficients() const { return b_; }
    bool has_closed_form() const { return static_cast<bool>(closed_); }
    const std::string& source_name() const { return source_name_; }

private:
    std::vector<double> b_;
    double tail_mass_ = 0.0;
    double second_moment_ = 0.0;
    double mu_ = 0.0;
    double mu_tilde_ = 0.0;
    double derivative_at_one_ = 0.0;
    bool linear_ = false;
    bool affine_ = false;
    std::function<double(double)> closed_;
    std::function<double(double)> closed_derivative_;
    std::string source_name_;

    void finalize();
};

struct FixedPointResult {
    double rho_bar = 1.0;
    double derivative_at_fixed_point = 0.0;
};

// Smallest fixed point of sigma_hat in [0, 1], by bisection (tolerance
// 1e-12). Returns 1 when there is no interior fixed point. Throws
// std::domain_error for affine activations.
FixedPointResult fixed_point(const DualActivation& d);

// Norm transfer map sigma_l(gamma) = E_{z~N(0,gamma)}[sigma^2(z)] and its
// derivative, with the contraction constant
// alpha = min(2 sigma_l(0.5) - 1, 1 - sigma_l'(1)).
class NormTransferMap {
public:
    explicit NormTransferMap(const ActivationSpec& spec);
    double eval(double gamma) const;
    double derivative(double gamma) const;
    double alpha() const { return alpha_; }
    // Whether the numeric check of the contraction hypotheses (odd, monotone,
    // concave on the positives) passed.
    bool hypothesis_ok() const { return hypothesis_ok_; }

private:
    ActivationSpec spec_;
    double alpha_ = 0.0;
    bool hypothesis_ok_ = false;
};

NormTransferMap norm_transfer(const ActivationSpec& spec);

// sigma_hat_c for inputs with squared norms gx, gy and correlation rho,
// via generalized Hermite coefficients. Norms outside [0.05, 20] throw.
double dot_product_map(const ActivationSpec& spec, double gx, double gy,
                       double rho, int degree = kDefaultExpansionDegree);

// NormReLU closed forms.
struct NormReluConstants {
    double b = 0.0;
    double lambda = 1.0;
    double mu = 0.0;
};
NormReluConstants normrelu_constants(double c);
// sigma_l(gamma) for NormReLU_c and its derivative in gamma.
double normrelu_norm_transfer(double gamma, double c = kNormReluDefaultC);
double normrelu_norm_transfer_derivative(double gamma,
                                         double c = kNormReluDefaultC);
// Constant Hermite coefficient a_0^{gamma}.
double normrelu_mean_coefficient(double gamma, double c = kNormReluDefaultC);
// bias(gamma) = (a_0^{gamma})^2 / sigma_l(gamma); bias(1) = 0.
double normrelu_bias(double gamma, double c = kNormReluDefaultC);

}  // namespace deepcond
