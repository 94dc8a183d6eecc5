#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepcond/activation.hpp"
#include "deepcond/gram.hpp"
#include "deepcond/rng.hpp"

namespace deepcond {

struct NetworkConfig {
    int input_dim = 1;
    int width = 1;
    int depth = 0;
    std::string activation = "relu-normalized";
    bool normalize_layers = false;  // project each layer's output to unit length
    std::uint64_t seed = 0;
};

// Addresses every weight of a trial's network by (layer, row, col); layer
// `depth` holds the top vector v. Regeneration is cheap, so wide forward
// passes stream rows instead of materializing the matrices.
class WeightStream {
public:
    WeightStream(const NetworkConfig& cfg, std::uint64_t trial);

    int layer_cols(int layer) const;
    double weight(int layer, std::int64_t row, std::int64_t col) const;
    double top(std::int64_t i) const;
    const NetworkConfig& config() const { return cfg_; }
    std::uint64_t trial() const { return trial_; }

private:
    NetworkConfig cfg_;
    std::uint64_t trial_;
    CounterRng rng_;
};

struct NetworkSample {
    NetworkConfig cfg;
    std::uint64_t trial = 0;
    // weights[l] is width x layer_cols(l), row-major
    std::vector<std::vector<double>> weights;
    std::vector<double> top;
};

// Materializes all weights. Throws std::runtime_error when the total entry
// count exceeds the in-memory budget; use the streamed paths instead.
NetworkSample sample_network(const NetworkConfig& cfg, std::uint64_t trial = 0);

// Layer-L representation of one input (depth 0 returns the input).
std::vector<double> feature_map(const NetworkSample& net,
                                const std::vector<double>& x);

// Representations of several inputs with weights regenerated row by row
// (memory O(width), identical values to the materialized path).
std::vector<std::vector<double>> features_streamed(
    const NetworkConfig& cfg, std::uint64_t trial,
    const std::vector<std::vector<double>>& inputs);

// Gram of the layer-L features. Finite width: the diagonal is only close
// to 1, so the result is not flagged unit-diagonal.
GramMatrix empirical_kernel(const NetworkSample& net,
                            const std::vector<std::vector<double>>& inputs);
GramMatrix empirical_kernel_streamed(const NetworkConfig& cfg,
                                     std::uint64_t trial,
                                     const std::vector<std::vector<double>>& inputs);

// Parameter-gradient Gram (reverse-mode through the plain network; requires
// normalize_layers off).
GramMatrix empirical_ntk(const NetworkSample& net,
                         const std::vector<std::vector<double>>& inputs);

// Network output f(x) = v . Phi(x), used by the finite-difference oracle.
double network_output(const NetworkSample& net, const std::vector<double>& x);

// Unit-length projection (the per-layer normalization map). Exactly
// idempotent; throws on the zero vector.
void normalize_to_unit(std::vector<double>& v);

}  // namespace deepcond
