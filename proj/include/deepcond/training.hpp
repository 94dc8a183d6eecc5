#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepcond/activation.hpp"
#include "deepcond/gram.hpp"

namespace deepcond {

struct RegressionProblem {
    int n = 0;  // examples
    int p = 0;  // feature dimension
    std::vector<double> features;  // n x p row-major
    std::vector<double> labels;    // |y_i| <= 1
};

// Diagonal design with singular values spread to hit the given kappa
// exactly, plus consistent labels (zero-loss attainable).
RegressionProblem make_conditioned_problem(int n, double kappa,
                                           std::uint64_t seed);
// Kernel-space problem: A with A^T A = kbar (Cholesky transpose) and labels
// from a seeded linear target.
RegressionProblem make_kernel_problem(const GramMatrix& kbar,
                                      const std::vector<double>& labels);

struct TrainRun {
    double step_size = 0.0;
    long iterations = 0;
    double kappa = 0.0;  // kappa(A^T A), used by the rate envelope
    std::vector<double> loss_trajectory;
    std::vector<double> rate_bound;  // e^{-t/(4 kappa)} * loss_0
    bool rate_ok = true;             // trajectory under the envelope (+1e-9)
};

// Full-batch gradient descent on the square loss (1/n) sum (a_i.w - y_i)^2.
// eta <= 0 picks 2/(lambda_min + lambda_max) of the Hessian.
TrainRun gd_top_layer(const RegressionProblem& problem, double eta, int steps);

// Uniform-row SGD at eta = 1/(2 beta), run in halving epochs of
// ceil(8 n beta / lambda_min(A^T A)) steps, each restarting from the epoch's
// average iterate, until the expected loss target eps.
TrainRun sgd_top_layer(const RegressionProblem& problem, std::uint64_t seed,
                       double eps);

struct Interpolator {
    std::vector<double> dual_weights;     // kbar^{-1} y
    std::vector<double> train_residuals;  // kbar w - y
    double max_abs_residual = 0.0;
    double predictor_norm_sq = 0.0;  // y^T kbar^{-1} y
};

// Minimum-norm interpolator in the kernel's feature space. Throws for
// lambda_min <= 1e-10 or condition number above 1e12 (deepen the network).
Interpolator min_norm_interpolator(const GramMatrix& kbar,
                                   const std::vector<double>& labels);

struct RiskEstimate {
    double excess_risk = 0.0;
    double std_error = 0.0;  // paired, against the reference predictor
    double predictor_norm = 0.0;
    double train_residual_max = 0.0;
    int depth = 0;
    double delta = 0.0;  // separation measured on the training sample
    double risk = 0.0;   // test risk of the interpolator
    double reference_risk = 0.0;
};

// Test excess risk of the minimum-norm kernel interpolator versus a
// ridgeless reference fit on an independent sample of size 4n. depth <= 0
// picks L1 at the measured separation. Targets: "zeros", "linear", "noise".
RiskEstimate excess_risk_estimate(const ActivationSpec& spec, int depth, int n,
                                  int n_test, const std::string& target,
                                  std::uint64_t seed);

}  // namespace deepcond
