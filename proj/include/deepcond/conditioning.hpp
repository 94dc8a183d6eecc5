#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "deepcond/bounds.hpp"
#include "deepcond/dual.hpp"
#include "deepcond/gram.hpp"

namespace deepcond {

struct SpectrumSummary {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = std::numeric_limits<double>::infinity();
    bool degenerate = false;  // lambda_min <= 0
    std::vector<double> eigenvalues;  // ascending
};

// Full symmetric eigen-decomposition summary; n <= 4096.
SpectrumSummary spectrum(const GramMatrix& k);

// One entrywise application of the dual. Composed values that stray outside
// [-1, 1] by <= 1e-9 are clamped; larger excursions throw.
GramMatrix apply_dual(const GramMatrix& k, const DualActivation& d);

// L-fold entrywise composition sigma_hat^(L)[K]. Requires unit diagonal.
GramMatrix propagate_kernel(const GramMatrix& k, const DualActivation& d, int L);

// One NTK entry for input correlation rho at depth L.
double ntk_entry(const DualActivation& d, double rho, int L);
// Closed form of the (constant) NTK diagonal.
double ntk_diagonal(const DualActivation& d, int L);
// NTK matrix for unit-diagonal input Gram; result has non-unit diagonal.
GramMatrix ntk_matrix(const GramMatrix& k, const DualActivation& d, int L);

struct DepthRecord {
    int depth = 0;
    double max_off_diag = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    double bound_b = std::numeric_limits<double>::quiet_NaN();
    double bound_kappa = std::numeric_limits<double>::quiet_NaN();
};

struct DepthProfile {
    std::vector<DepthRecord> per_depth;
    double delta_sep = 0.0;  // 1 - max |off-diagonal| of the input Gram
    double delta_ns = 0.0;   // lambda_min of the input Gram (<= 0: not usable)
    double mu = 0.0;
    bool mu_zero = false;    // linear activation; bound checks skipped
    BoundParams thresholds;  // computed at delta_sep
    std::vector<std::string> violations;
    bool bounds_respected() const { return violations.empty(); }
};

// Depth sweep of the top-layer kernel with every applicable bound checked
// and violations recorded (never thrown).
DepthProfile verify_top_layer(const GramMatrix& k, const DualActivation& d,
                              int l_max);
// Same for the NTK; measured quantities are normalized by the diagonal.
DepthProfile verify_ntk(const GramMatrix& k, const DualActivation& d, int l_max);

struct EigenLbResult {
    double lhs_min = 0.0;    // lambda_min(f[K])
    double rhs_bound = 0.0;  // f(1) - f(1 - delta)
};

// Checks lambda_min(f[K]) >= f(1) - f(1-delta) for an entrywise map f with a
// non-negative power series. Requires K unit-diagonal with lambda_min >=
// delta. Throws std::runtime_error if the inequality fails by more than 1e-9.
EigenLbResult eigen_lb_check(const std::function<double(double)>& f,
                             const GramMatrix& k, double delta);

struct GeneralNormStep {
    double gamma_x = 1.0;
    double gamma_y = 1.0;
    double rho = 0.0;
};

struct GeneralNormTrace {
    std::vector<GeneralNormStep> steps;  // steps[l] after l layers
    double l_hat = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    std::vector<double> rho_bound;  // B_{mu/2}(l - l_hat, delta) for l >= l_hat
    bool hypothesis_warning = false;
};

// Joint norm/correlation recursion for non-unit-norm inputs:
// gamma <- sigma_l(gamma), rho <- sigma_hat_c / sqrt(sigma_l sigma_l).
GeneralNormTrace general_norm_propagate(double gamma_x, double gamma_y,
                                        double rho, const ActivationSpec& spec,
                                        int layers);

struct UncenteredTrace {
    std::vector<double> trace;  // rho after 0..L layers
    double rho_bar = 1.0;
    long l0 = 0;
    std::vector<double> rate_bound;  // valid from l0 on; +inf before
    bool boundary_case = false;      // rho_bar = 1 with unit derivative
    double eps = 0.0;                // boundary-case target
    long layers_to_eps = -1;         // first l with trace >= 1 - eps
    double layers_bound = 0.0;       // guaranteed layer-count bound
};

// Convergence of sigma_hat iterates to the smallest fixed point for
// square-normalized (possibly uncentered) activations.
UncenteredTrace uncentered_convergence(const DualActivation& d, double rho0,
                                       int layers, double eps = 1e-2);

struct NormReluBoundResult {
    std::vector<double> rho_trace;
    double measured_rho = 0.0;
    double bound = 0.0;
    double l_hat = 0.0;
    double alpha_prime = 0.0;
    double delta_prime = 0.0;
};

// NormReLU two-input recursion with non-unit norms checked against
// B_{mu/2}(L - L_hat, delta - delta') + delta' * eps. Throws if the measured
// correlation exceeds the bound by more than 1e-9.
NormReluBoundResult normrelu_correlation_bound(double gamma_x, double gamma_y,
                                               double rho, int layers,
                                               double eps,
                                               double c = kNormReluDefaultC);

}  // namespace deepcond
