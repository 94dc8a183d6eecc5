#include "deepcond/experiments.hpp"

#include <cmath>
#include <stdexcept>

#include "deepcond/bounds.hpp"
#include "deepcond/dual.hpp"
#include "deepcond/linalg.hpp"
#include "deepcond/parallel.hpp"
#include "deepcond/rng.hpp"

namespace deepcond {

namespace {

Stat stat_of(const std::vector<double>& values) {
    Stat s;
    s.trials = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / s.trials;
    if (s.trials > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std_error = std::sqrt(ss / (s.trials - 1)) / std::sqrt(double(s.trials));
    }
    return s;
}

double unit_dot(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("inputs must share a dimension");
    }
    double nx = 0.0, ny = 0.0, xy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        nx += x[i] * x[i];
        ny += y[i] * y[i];
        xy += x[i] * y[i];
    }
    if (std::abs(nx - 1.0) > 1e-9 || std::abs(ny - 1.0) > 1e-9) {
        throw std::domain_error("inputs must be unit vectors");
    }
    return xy;
}

}  // namespace

DecayResult correlation_decay_experiment(const NetworkConfig& cfg,
                                         const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         int trials) {
    if (!cfg.normalize_layers) {
        throw std::domain_error(
            "correlation_decay_experiment: per-layer normalization required");
    }
    if (trials < 1) throw std::domain_error("trials must be >= 1");
    const double rho0 = std::clamp(unit_dot(x, y), -1.0, 1.0);
    const ActivationSpec& act = get_activation(cfg.activation);
    const CounterRng rng(cfg.seed);
    const int m = cfg.width;
    const int depth = cfg.depth;

    // rho[t][h]: trial t's correlation after h layers.
    std::vector<std::vector<double>> rho(trials,
                                         std::vector<double>(depth + 1, rho0));
    parallel_for(trials, [&](std::size_t t) {
        double r = rho0;
        for (int h = 1; h <= depth; ++h) {
            const double mix = std::sqrt(std::max(0.0, 1.0 - r * r));
            double suu = 0.0, svv = 0.0, suv = 0.0;
            for (int j = 0; j < m; ++j) {
                auto [g1, g2] = rng.normal_pair(t, h, j);
                const double a = act(g1);
                const double b = act(r * g1 + mix * g2);
                suu += a * a;
                svv += b * b;
                suv += a * b;
            }
            if (suu <= 0.0 || svv <= 0.0) {
                throw std::runtime_error("decay: layer projection hit zero");
            }
            r = suv / std::sqrt(suu * svv);
            rho[t][h] = r;
        }
    });

    DecayResult out;
    out.summary.observable = "pairwise correlation by depth";
    out.summary.seed = cfg.seed;
    out.summary.trials = trials;
    out.summary.stats.resize(depth + 1);
    std::vector<double> column(trials);
    for (int h = 0; h <= depth; ++h) {
        for (int t = 0; t < trials; ++t) column[t] = rho[t][h];
        out.summary.stats[h] = stat_of(column);
    }

    DualActivation d = DualActivation::from_activation(act);
    out.mu = d.mu();
    out.delta = std::clamp(1.0 - std::abs(rho0), 1e-12, 1.0 - 1e-12);
    out.l0 = d.linear() ? 0 : depth_L0(out.mu, out.delta);
    // Log-linear fit of |mean rho_h| past l0, above the noise floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (int h = static_cast<int>(out.l0) + 1; h <= depth; ++h) {
        const Stat& s = out.summary.stats[h];
        if (std::abs(s.mean) > 3.0 * s.std_error && std::abs(s.mean) > 1e-12) {
            double lx = h, ly = std::log(std::abs(s.mean));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
            ++pts;
        }
    }
    out.fitted_rate = pts >= 2
                          ? std::exp((pts * sxy - sx * sy) / (pts * sxx - sx * sx))
                          : 0.0;
    return out;
}

TrialSummary min_singular_for_inputs(const std::vector<std::vector<double>>& inputs,
                                     int m, int trials, std::uint64_t seed) {
    const int n = static_cast<int>(inputs.size());
    if (n < 1 || m < 1 || trials < 1) {
        throw std::domain_error("min_singular: n, m, trials must be >= 1");
    }
    const int d = static_cast<int>(inputs[0].size());
    const ActivationSpec& relu = get_activation("relu");
    const CounterRng rng(seed);

    std::vector<double> sigma_min(trials);
    parallel_for(trials, [&](std::size_t t) {
        std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> w(d), s(n);
        for (int k = 0; k < m; ++k) {
            for (int c = 0; c < d; ++c) {
                w[c] = rng.normal(t, 0, static_cast<std::uint64_t>(k) * d + c);
            }
            for (int i = 0; i < n; ++i) {
                double p = 0.0;
                for (int c = 0; c < d; ++c) p += w[c] * inputs[i][c];
                s[i] = relu(p);
            }
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) gram[i * n + j] += s[i] * s[j];
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                gram[i * n + j] /= m;
                gram[j * n + i] = gram[i * n + j];
            }
        }
        sigma_min[t] = symmetric_eigenvalues(gram, n).values.front();
    });

    TrialSummary out;
    out.observable = "sigma_min(Phi^T Phi)";
    out.seed = seed;
    out.trials = trials;
    out.stats.resize(trials);
    for (int t = 0; t < trials; ++t) {
        out.stats[t] = {sigma_min[t], 0.0, 1};
    }
    return out;
}

MinSingularResult one_layer_min_singular_experiment(int n, int m, double delta,
                                                    int trials,
                                                    std::uint64_t seed) {
    if (!(delta > 0.0) || delta > 1.0) {
        throw std::domain_error("min_singular: delta must be in (0, 1]");
    }
    const int d = 2 * n;
    const CounterRng rng(seed);
    // Rejection-sample unit inputs until all pairs are (1-delta)-separated.
    std::vector<std::vector<double>> inputs;
    std::uint64_t draw = 0;
    const std::uint64_t budget = 10000ull * n;
    while (static_cast<int>(inputs.size()) < n) {
        if (draw >= budget) {
            throw std::runtime_error(
                "min_singular: separation rejection sampling exceeded its draw "
                "budget; lower delta or n");
        }
        std::vector<double> v(d);
        double norm_sq = 0.0;
        for (int c = 0; c < d; ++c) {
            v[c] = rng.normal(~0ull, 0, draw * d + c);
            norm_sq += v[c] * v[c];
        }
        ++draw;
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& t : v) t *= inv;
        bool ok = true;
        for (const auto& u : inputs) {
            double dot = 0.0;
            for (int c = 0; c < d; ++c) dot += u[c] * v[c];
            if (std::abs(dot) > 1.0 - delta) {
                ok = false;
                break;
            }
        }
        if (ok) inputs.push_back(std::move(v));
    }

    MinSingularResult out;
    out.per_trial = min_singular_for_inputs(inputs, m, trials, seed);
    out.min_sigma_min = out.per_trial.stats[0].mean;
    for (const Stat& s : out.per_trial.stats) {
        out.min_sigma_min = std::min(out.min_sigma_min, s.mean);
    }
    out.theory_scale = std::pow(delta, 1.5) / std::pow(double(n), 3);
    out.ratio = out.min_sigma_min / out.theory_scale;
    out.inputs = std::move(inputs);
    return out;
}

BnInvarianceResult bn_invariance_check(const ActivationSpec& spec, int batch,
                                       int width, std::uint64_t seed) {
    if (batch < 2 || width < 1) {
        throw std::domain_error("bn_invariance: batch >= 2 and width >= 1");
    }
    const CounterRng rng(seed);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(width));

    auto batch_normalize = [](std::vector<double> v) {
        const int b = static_cast<int>(v.size());
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= b;
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= b;
        if (var <= 0.0) {
            throw std::runtime_error("batch normalization: zero batch variance");
        }
        const double inv = 1.0 / std::sqrt(var);
        for (double& x : v) x = (x - mean) * inv;
        return v;
    };

    // Pre-activation inputs X (width x batch) and the unit's weight vector.
    std::vector<double> w(width);
    for (int k = 0; k < width; ++k) w[k] = rng.normal(0, 0, k);
    std::vector<double> v_raw(batch, 0.0), v_norm(batch, 0.0);
    for (int j = 0; j < batch; ++j) {
        for (int k = 0; k < width; ++k) {
            double x = rng.normal(0, 1, static_cast<std::uint64_t>(k) * batch + j);
            v_raw[j] += w[k] * inv_sqrt_m * spec.raw(x);
            v_norm[j] += w[k] * inv_sqrt_m * spec(x);
        }
    }
    std::vector<double> bn_raw = batch_normalize(std::move(v_raw));
    std::vector<double> bn_norm = batch_normalize(std::move(v_norm));
    BnInvarianceResult out;
    for (int j = 0; j < batch; ++j) {
        out.bn_deviation = std::max(out.bn_deviation,
                                    std::abs(bn_raw[j] - bn_norm[j]));
    }

    // Post-activation layer normalization on a single pre-activation vector.
    std::vector<double> ln_raw(width), ln_norm(width);
    for (int k = 0; k < width; ++k) {
        double x = rng.normal(0, 2, k);
        ln_raw[k] = inv_sqrt_m * spec.raw(x);
        ln_norm[k] = inv_sqrt_m * spec(x);
    }
    ln_raw = batch_normalize(std::move(ln_raw));
    ln_norm = batch_normalize(std::move(ln_norm));
    for (int k = 0; k < width; ++k) {
        out.ln_deviation = std::max(out.ln_deviation,
                                    std::abs(ln_raw[k] - ln_norm[k]));
    }
    out.max_abs_deviation = std::max(out.bn_deviation, out.ln_deviation);
    return out;
}

}  // namespace deepcond
