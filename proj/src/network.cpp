#include "deepcond/network.hpp"

#include <cmath>
#include <stdexcept>

#include "deepcond/kernels.hpp"
#include "deepcond/parallel.hpp"

namespace deepcond {

namespace {

constexpr std::int64_t kMaxMaterializedEntries = 200'000'000;

double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

void normalize_to_unit(std::vector<double>& v) {
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    if (norm_sq <= 0.0) {
        throw std::runtime_error("layer normalization hit a zero vector");
    }
    // Within rounding of unit length already: leave the vector alone, which
    // makes the projection exactly idempotent.
    if (std::abs(norm_sq - 1.0) <= 1e-13 * v.size()) return;
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
}

WeightStream::WeightStream(const NetworkConfig& cfg, std::uint64_t trial)
    : cfg_(cfg), trial_(trial), rng_(cfg.seed) {
    if (cfg.input_dim < 1 || cfg.width < 1 || cfg.depth < 0) {
        throw std::invalid_argument("NetworkConfig: d, m >= 1 and depth >= 0");
    }
}

int WeightStream::layer_cols(int layer) const {
    return layer == 0 ? cfg_.input_dim : cfg_.width;
}

double WeightStream::weight(int layer, std::int64_t row, std::int64_t col) const {
    return rng_.normal(trial_, static_cast<std::uint32_t>(layer),
                       static_cast<std::uint64_t>(row) * layer_cols(layer) + col);
}

double WeightStream::top(std::int64_t i) const {
    return rng_.normal(trial_, static_cast<std::uint32_t>(cfg_.depth), i);
}

NetworkSample sample_network(const NetworkConfig& cfg, std::uint64_t trial) {
    WeightStream stream(cfg, trial);
    std::int64_t total = static_cast<std::int64_t>(cfg.width) * cfg.input_dim +
                         static_cast<std::int64_t>(cfg.depth > 0 ? cfg.depth - 1 : 0) *
                             cfg.width * cfg.width +
                         cfg.width;
    if (total > kMaxMaterializedEntries) {
        throw std::runtime_error(
            "sample_network: weight count exceeds the in-memory budget; "
            "use the streamed paths");
    }
    NetworkSample net;
    net.cfg = cfg;
    net.trial = trial;
    net.weights.resize(cfg.depth);
    for (int l = 0; l < cfg.depth; ++l) {
        const int cols = stream.layer_cols(l);
        net.weights[l].resize(static_cast<std::size_t>(cfg.width) * cols);
        double* w = net.weights[l].data();
        parallel_for(cfg.width, [&stream, w, cols, l](std::size_t r) {
            for (int c = 0; c < cols; ++c) {
                w[r * cols + c] = stream.weight(l, static_cast<std::int64_t>(r), c);
            }
        });
    }
    // With no hidden layer the top vector acts on the input directly.
    const int top_dim = cfg.depth == 0 ? cfg.input_dim : cfg.width;
    net.top.resize(top_dim);
    for (int i = 0; i < top_dim; ++i) net.top[i] = stream.top(i);
    return net;
}

std::vector<double> feature_map(const NetworkSample& net,
                                const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.cfg.input_dim) {
        throw std::invalid_argument("feature_map: input dimension mismatch");
    }
    const ActivationSpec& act = get_activation(net.cfg.activation);
    const int m = net.cfg.width;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> cur = x;
    for (int l = 0; l < net.cfg.depth; ++l) {
        const int cols = static_cast<int>(cur.size());
        std::vector<double> next(m);
        const double* w = net.weights[l].data();
        for (int k = 0; k < m; ++k) {
            next[k] = inv_sqrt_m * act(dot(w + static_cast<std::size_t>(k) * cols,
                                           cur.data(), cols));
        }
        if (net.cfg.normalize_layers) normalize_to_unit(next);
        cur = std::move(next);
    }
    return cur;
}

std::vector<std::vector<double>> features_streamed(
    const NetworkConfig& cfg, std::uint64_t trial,
    const std::vector<std::vector<double>>& inputs) {
    WeightStream stream(cfg, trial);
    const ActivationSpec& act = get_activation(cfg.activation);
    const int n = static_cast<int>(inputs.size());
    const int m = cfg.width;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    std::vector<std::vector<double>> cur = inputs;
    for (int l = 0; l < cfg.depth; ++l) {
        const int cols = static_cast<int>(cur[0].size());
        std::vector<std::vector<double>> next(n, std::vector<double>(m));
        // One task per output row: regenerate the weight row once, reuse it
        // across all inputs.
        parallel_for(m, [&](std::size_t k) {
            std::vector<double> row(cols);
            for (int c = 0; c < cols; ++c) {
                row[c] = stream.weight(l, static_cast<std::int64_t>(k), c);
            }
            for (int i = 0; i < n; ++i) {
                next[i][k] = inv_sqrt_m * act(dot(row.data(), cur[i].data(), cols));
            }
        });
        if (cfg.normalize_layers) {
            for (auto& v : next) normalize_to_unit(v);
        }
        cur = std::move(next);
    }
    return cur;
}

namespace {

GramMatrix gram_of(const std::vector<std::vector<double>>& feats) {
    const int n = static_cast<int>(feats.size());
    const int m = static_cast<int>(feats[0].size());
    std::vector<double> flat(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        std::copy(feats[i].begin(), feats[i].end(),
                  flat.begin() + static_cast<std::size_t>(i) * m);
    }
    GramMatrix g(n, false);
    gram_from_features(flat.data(), n, m, g.entries().data());
    return g;
}

}  // namespace

GramMatrix empirical_kernel(const NetworkSample& net,
                            const std::vector<std::vector<double>>& inputs) {
    std::vector<std::vector<double>> feats(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        feats[i] = feature_map(net, inputs[i]);
    }
    return gram_of(feats);
}

GramMatrix empirical_kernel_streamed(
    const NetworkConfig& cfg, std::uint64_t trial,
    const std::vector<std::vector<double>>& inputs) {
    return gram_of(features_streamed(cfg, trial, inputs));
}

GramMatrix empirical_ntk(const NetworkSample& net,
                         const std::vector<std::vector<double>>& inputs) {
    if (net.cfg.normalize_layers) {
        throw std::domain_error("empirical_ntk: defined for the plain network "
                                "(normalize_layers off)");
    }
    const ActivationSpec& act = get_activation(net.cfg.activation);
    const int n = static_cast<int>(inputs.size());
    const int m = net.cfg.width;
    const int depth = net.cfg.depth;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

    // Per input: activations phi[0..depth] and backward signals s[1..depth].
    std::vector<std::vector<std::vector<double>>> phi(n), sig(n);
    parallel_for(n, [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        auto& ph = phi[i];
        ph.resize(depth + 1);
        ph[0] = inputs[i];
        std::vector<std::vector<double>> pre(depth);
        for (int l = 0; l < depth; ++l) {
            const int cols = static_cast<int>(ph[l].size());
            pre[l].resize(m);
            ph[l + 1].resize(m);
            const double* w = net.weights[l].data();
            for (int k = 0; k < m; ++k) {
                double p = dot(w + static_cast<std::size_t>(k) * cols,
                               ph[l].data(), cols);
                pre[l][k] = p;
                ph[l + 1][k] = inv_sqrt_m * act(p);
            }
        }
        auto& ss = sig[i];
        ss.resize(depth + 1);  // ss[l] for l in 1..depth
        if (depth > 0) {
            ss[depth].resize(m);
            for (int k = 0; k < m; ++k) {
                ss[depth][k] =
                    inv_sqrt_m * act.derivative(pre[depth - 1][k]) * net.top[k];
            }
            for (int l = depth - 1; l >= 1; --l) {
                ss[l].resize(m);
                const double* w = net.weights[l].data();  // W_{l+1}
                std::vector<double> back(m, 0.0);
                for (int k = 0; k < m; ++k) {
                    const double sk = ss[l + 1][k];
                    const double* row = w + static_cast<std::size_t>(k) * m;
                    for (int j = 0; j < m; ++j) back[j] += row[j] * sk;
                }
                for (int j = 0; j < m; ++j) {
                    ss[l][j] = inv_sqrt_m * act.derivative(pre[l - 1][j]) * back[j];
                }
            }
        }
    });

    GramMatrix out(n, false);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = dot(phi[i][depth].data(), phi[j][depth].data(),
                           static_cast<int>(phi[i][depth].size()));
            for (int l = 1; l <= depth; ++l) {
                double s_dot = dot(sig[i][l].data(), sig[j][l].data(), m);
                double phi_dot = dot(phi[i][l - 1].data(), phi[j][l - 1].data(),
                                     static_cast<int>(phi[i][l - 1].size()));
                v += s_dot * phi_dot;
            }
            out.at(i, j) = out.at(j, i) = v;
        }
    }
    return out;
}

double network_output(const NetworkSample& net, const std::vector<double>& x) {
    std::vector<double> f = feature_map(net, x);
    return dot(net.top.data(), f.data(), static_cast<int>(f.size()));
}

}  // namespace deepcond
