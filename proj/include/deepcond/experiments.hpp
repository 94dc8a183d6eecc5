#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepcond/activation.hpp"
#include "deepcond/network.hpp"

namespace deepcond {

struct Stat {
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

struct TrialSummary {
    std::string observable;
    std::uint64_t seed = 0;
    int trials = 0;
    std::vector<Stat> stats;  // one per depth / pair / trial group
};

struct DecayResult {
    TrialSummary summary;  // stats[h] = rho after h layers, h = 0..L
    double mu = 0.0;
    long l0 = 0;           // depth threshold at delta = 1 - |rho_0|
    double delta = 0.0;
    double fitted_rate = 0.0;  // exp of the log-|mean| slope past l0
};

// Depth profile of the normalized pairwise dot product through a randomly
// initialized per-layer-normalized network. Conditioned on the previous
// layer's unit representations, each layer sees m i.i.d. bivariate normal
// pairs with their correlation, so the pair's trajectory is simulated
// exactly from that two-dimensional law; width never has to be materialized.
DecayResult correlation_decay_experiment(const NetworkConfig& cfg,
                                         const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         int trials);

struct MinSingularResult {
    TrialSummary per_trial;  // sigma_min per trial
    double min_sigma_min = 0.0;
    double theory_scale = 0.0;  // delta^{3/2} / n^3
    double ratio = 0.0;         // min_sigma_min / theory_scale
    std::vector<std::vector<double>> inputs;
};

// sigma_min(Phi(X)^T Phi(X)) for one-layer un-normalized ReLU features on
// random (1-delta)-separated unit inputs.
MinSingularResult one_layer_min_singular_experiment(int n, int m, double delta,
                                                    int trials,
                                                    std::uint64_t seed);

// Same statistic for caller-provided inputs (degenerate configurations
// included).
TrialSummary min_singular_for_inputs(const std::vector<std::vector<double>>& inputs,
                                     int m, int trials, std::uint64_t seed);

struct BnInvarianceResult {
    double max_abs_deviation = 0.0;
    double bn_deviation = 0.0;
    double ln_deviation = 0.0;
};

// Batch normalization of w . sigma(X)/sqrt(m) and post-activation layer
// normalization of sigma(x)/sqrt(m), computed with the raw activation and
// with its normalized version; returns the elementwise deviation.
BnInvarianceResult bn_invariance_check(const ActivationSpec& spec, int batch,
                                       int width, std::uint64_t seed);

}  // namespace deepcond
