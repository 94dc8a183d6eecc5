#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deepcond/conditioning.hpp"
#include "deepcond/experiments.hpp"
#include "deepcond/network.hpp"
#include "deepcond/parallel.hpp"

using namespace deepcond;

namespace {

std::vector<std::vector<double>> unit_pair(double rho) {
    return {{1.0, 0.0}, {rho, std::sqrt(1.0 - rho * rho)}};
}

}  // namespace

TEST_CASE("weight sampling is deterministic") {
    NetworkConfig cfg;
    cfg.input_dim = 5;
    cfg.width = 17;
    cfg.depth = 3;
    cfg.seed = 42;
    NetworkSample a = sample_network(cfg);
    NetworkSample b = sample_network(cfg);
    for (int l = 0; l < 3; ++l) {
        REQUIRE(a.weights[l].size() == b.weights[l].size());
        for (std::size_t i = 0; i < a.weights[l].size(); ++i) {
            CHECK(a.weights[l][i] == b.weights[l][i]);  // bitwise
        }
    }
    // distinct trials differ
    NetworkSample c = sample_network(cfg, 1);
    CHECK(a.weights[0][0] != c.weights[0][0]);
}

TEST_CASE("weight entries are standard normal") {
    CounterRng rng(7);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < n; ++t) {
        double v = rng.normal(t, 0, 0);  // entry (0,0) across trials
        sum += v;
        sum_sq += v * v;
    }
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("adjacent seeds decorrelate") {
    CounterRng a(1000), b(1001);
    const int n = 100000;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = a.normal(0, 0, i);
        double y = b.normal(0, 0, i);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("streamed features equal the materialized forward pass") {
    NetworkConfig cfg;
    cfg.input_dim = 6;
    cfg.width = 33;
    cfg.depth = 2;
    cfg.activation = "relu-normalized";
    cfg.seed = 5;
    std::vector<std::vector<double>> inputs(3, std::vector<double>(6, 0.0));
    inputs[0][0] = 1.0;
    inputs[1][1] = 1.0;
    inputs[2] = {0.6, 0.8, 0, 0, 0, 0};
    NetworkSample net = sample_network(cfg, 4);
    auto streamed = features_streamed(cfg, 4, inputs);
    for (int i = 0; i < 3; ++i) {
        auto direct = feature_map(net, inputs[i]);
        REQUIRE(direct.size() == streamed[i].size());
        for (std::size_t k = 0; k < direct.size(); ++k) {
            CHECK(direct[k] == streamed[i][k]);  // bitwise
        }
    }
    // and the parallel schedule matches the serial reference
    int saved = thread_budget();
    set_thread_budget(1);
    auto serial = features_streamed(cfg, 4, inputs);
    set_thread_budget(saved);
    for (int i = 0; i < 3; ++i) {
        for (std::size_t k = 0; k < serial[i].size(); ++k) {
            CHECK(serial[i][k] == streamed[i][k]);
        }
    }
}

TEST_CASE("materialization respects the memory budget") {
    NetworkConfig cfg;
    cfg.input_dim = 4;
    cfg.width = 20000;
    cfg.depth = 3;  // ~8e8 weight entries
    CHECK_THROWS_AS(sample_network(cfg), std::runtime_error);
}

TEST_CASE("depth zero is the identity feature map") {
    NetworkConfig cfg;
    cfg.input_dim = 4;
    cfg.width = 9;
    cfg.depth = 0;
    NetworkSample net = sample_network(cfg);
    std::vector<double> x = {0.5, -0.5, 0.5, 0.5};
    auto f = feature_map(net, x);
    CHECK(f == x);
}

TEST_CASE("unit projection is exactly idempotent and rejects zero") {
    std::vector<double> v = {3.0, 4.0, 0.0};
    normalize_to_unit(v);
    std::vector<double> twice = v;
    normalize_to_unit(twice);
    CHECK(twice == v);
    std::vector<double> zero(3, 0.0);
    CHECK_THROWS_AS(normalize_to_unit(zero), std::runtime_error);
}

TEST_CASE("identity activation preserves expected feature norm") {
    NetworkConfig cfg;
    cfg.input_dim = 8;
    cfg.width = 256;
    cfg.depth = 1;
    cfg.activation = "identity";
    cfg.seed = 3;
    std::vector<double> x(8, 0.0);
    x[0] = 1.0;
    const int trials = 200;
    double mean = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        auto f = feature_map(sample_network(cfg, t), x);
        double norm_sq = 0.0;
        for (double v : f) norm_sq += v * v;
        mean += norm_sq;
        sq += norm_sq * norm_sq;
    }
    mean /= trials;
    double se = std::sqrt((sq / trials - mean * mean) / (trials - 1));
    CHECK(std::abs(mean - 1.0) <= 5.0 * se);
}

TEST_CASE("wide single relu layer concentrates the feature norm") {
    NetworkConfig cfg;
    cfg.input_dim = 8;
    cfg.width = 4096;
    cfg.depth = 1;
    cfg.activation = "relu-normalized";
    cfg.seed = 12;
    std::vector<double> x(8, 0.0);
    x[3] = 1.0;
    int inside = 0;
    const int trials = 400;
    for (int t = 0; t < trials; ++t) {
        auto feats = features_streamed(cfg, t, {x});
        double norm_sq = 0.0;
        for (double v : feats[0]) norm_sq += v * v;
        if (norm_sq >= 0.9 && norm_sq <= 1.1) ++inside;
    }
    CHECK(inside >= trials * 99 / 100);
}

TEST_CASE("one-layer kernel is unbiased for the dual") {
    DualActivation d = DualActivation::from_activation(
        get_activation("relu-normalized"));
    const ActivationSpec& act = get_activation("relu-normalized");
    const double rho = 0.43;
    CounterRng rng(99);
    const int draws = 20000;
    double sum = 0.0, sum_sq = 0.0;
    const double mix = std::sqrt(1.0 - rho * rho);
    for (int t = 0; t < draws; ++t) {
        auto [g1, g2] = rng.normal_pair(t, 0, 0);
        double v = act(g1) * act(rho * g1 + mix * g2);
        sum += v;
        sum_sq += v * v;
    }
    double mean = sum / draws;
    double se = std::sqrt((sum_sq / draws - mean * mean) / (draws - 1));
    CHECK(std::abs(mean - d.eval(rho)) <= 5.0 * se);
}

TEST_CASE("empirical kernel basics") {
    NetworkConfig cfg;
    cfg.input_dim = 3;
    cfg.width = 64;
    cfg.depth = 1;
    cfg.activation = "identity";
    cfg.seed = 8;
    NetworkSample net = sample_network(cfg);
    GramMatrix one = empirical_kernel(net, {{1.0, 0.0, 0.0}});
    CHECK(one.size() == 1);

    // E[K_12] = x1 . x2 for the linear network
    const double rho = 0.35;
    auto pair = unit_pair(rho);
    pair[0].push_back(0.0);
    pair[1].push_back(0.0);
    const int trials = 400;
    double mean = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        GramMatrix k = empirical_kernel_streamed(cfg, t, pair);
        mean += k.at(0, 1);
        sq += k.at(0, 1) * k.at(0, 1);
    }
    mean /= trials;
    double se = std::sqrt((sq / trials - mean * mean) / (trials - 1));
    CHECK(std::abs(mean - rho) <= 5.0 * se);
}

TEST_CASE("kernel error halves when the width quadruples") {
    const double rho = 0.6;
    auto inputs = unit_pair(rho);
    GramMatrix gram = GramMatrix::from_vectors(inputs);
    DualActivation d = DualActivation::from_activation(
        get_activation("relu-normalized"));
    const int depth = 2;
    GramMatrix ideal = propagate_kernel(gram, d, depth);
    const int trials = 50;
    auto mean_abs_error = [&](int m) {
        NetworkConfig cfg;
        cfg.input_dim = 2;
        cfg.width = m;
        cfg.depth = depth;
        cfg.activation = "relu-normalized";
        cfg.seed = 31;
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) {
            GramMatrix k = empirical_kernel_streamed(cfg, t, inputs);
            acc += std::abs(k.at(0, 1) - ideal.at(0, 1));
        }
        return acc / trials;
    };
    double coarse = mean_abs_error(256);
    double fine = mean_abs_error(1024);
    double ratio = fine / coarse;
    CHECK(ratio > 0.25);
    CHECK(ratio < 0.75);
}

TEST_CASE("empirical ntk matches a finite-difference jacobian") {
    NetworkConfig cfg;
    cfg.input_dim = 2;
    cfg.width = 2;
    cfg.depth = 1;
    cfg.activation = "tanh-normalized";
    cfg.seed = 17;
    NetworkSample net = sample_network(cfg);
    auto inputs = unit_pair(0.2);
    GramMatrix ntk = empirical_ntk(net, inputs);

    // flatten parameters, perturb each, and assemble the gradients
    const double h = 1e-5;
    auto grad_of = [&](const std::vector<double>& x) {
        std::vector<double> g;
        NetworkSample probe = net;
        auto push = [&](double* slot) {
            double saved = *slot;
            *slot = saved + h;
            double up = network_output(probe, x);
            *slot = saved - h;
            double down = network_output(probe, x);
            *slot = saved;
            g.push_back((up - down) / (2.0 * h));
        };
        for (auto& layer : probe.weights) {
            for (double& w : layer) push(&w);
        }
        for (double& v : probe.top) push(&v);
        return g;
    };
    auto g0 = grad_of(inputs[0]);
    auto g1 = grad_of(inputs[1]);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    CHECK(std::abs(ntk.at(0, 0) - dot(g0, g0)) / std::abs(ntk.at(0, 0)) < 1e-4);
    CHECK(std::abs(ntk.at(0, 1) - dot(g0, g1)) / std::abs(ntk.at(0, 0)) < 1e-4);
    CHECK(std::abs(ntk.at(1, 1) - dot(g1, g1)) / std::abs(ntk.at(1, 1)) < 1e-4);

    // depth 0: gradient w.r.t. the top vector only
    NetworkConfig flat = cfg;
    flat.depth = 0;
    GramMatrix base = empirical_ntk(sample_network(flat), inputs);
    CHECK(base.at(0, 1) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("empirical ntk is symmetric and concentrates") {
    NetworkConfig cfg;
    cfg.input_dim = 2;
    cfg.width = 1024;
    cfg.depth = 1;
    cfg.activation = "relu-normalized";
    cfg.seed = 23;
    auto inputs = unit_pair(0.5);
    GramMatrix gram = GramMatrix::from_vectors(inputs);
    DualActivation d = DualActivation::from_activation(
        get_activation("relu-normalized"));
    GramMatrix ideal = ntk_matrix(gram, d, cfg.depth);
    const int trials = 20;
    double mean = 0.0, sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        GramMatrix ntk = empirical_ntk(sample_network(cfg, t), inputs);
        CHECK(std::abs(ntk.at(0, 1) - ntk.at(1, 0)) <= 1e-12);
        mean += ntk.at(0, 1);
        sq += ntk.at(0, 1) * ntk.at(0, 1);
    }
    mean /= trials;
    double se = std::sqrt((sq / trials - mean * mean) / (trials - 1));
    CHECK(std::abs(mean - ideal.at(0, 1)) <= 5.0 * se);
    NetworkConfig bad = cfg;
    bad.normalize_layers = true;
    CHECK_THROWS_AS(empirical_ntk(sample_network(bad), inputs), std::domain_error);
}

TEST_CASE("decay experiment determinism and fixed points") {
    NetworkConfig cfg;
    cfg.input_dim = 2;
    cfg.width = 128;
    cfg.depth = 8;
    cfg.activation = "relu-normalized";
    cfg.normalize_layers = true;
    cfg.seed = 7;
    auto inputs = unit_pair(0.8);
    DecayResult a = correlation_decay_experiment(cfg, inputs[0], inputs[1], 25);
    DecayResult b = correlation_decay_experiment(cfg, inputs[0], inputs[1], 25);
    for (int h = 0; h <= cfg.depth; ++h) {
        CHECK(a.summary.stats[h].mean == b.summary.stats[h].mean);  // bitwise
    }
    // identical inputs stay perfectly aligned
    DecayResult same = correlation_decay_experiment(cfg, inputs[0], inputs[0], 10);
    for (int h = 0; h <= cfg.depth; ++h) {
        CHECK(same.summary.stats[h].mean == 1.0);
        CHECK(same.summary.stats[h].std_error == 0.0);
    }
    // orthogonal inputs under an odd activation stay near zero
    NetworkConfig odd = cfg;
    odd.activation = "tanh-normalized";
    DecayResult ortho = correlation_decay_experiment(odd, {1.0, 0.0}, {0.0, 1.0}, 60);
    for (int h = 1; h <= odd.depth; ++h) {
        CHECK(std::abs(ortho.summary.stats[h].mean) <=
              4.0 * ortho.summary.stats[h].std_error + 1e-12);
    }
    NetworkConfig plain = cfg;
    plain.normalize_layers = false;
    CHECK_THROWS_AS(correlation_decay_experiment(plain, inputs[0], inputs[1], 5),
                    std::domain_error);
}

TEST_CASE("decay envelope against the depth bound") {
    NetworkConfig cfg;
    cfg.input_dim = 2;
    cfg.width = 2048;
    cfg.depth = 20;
    cfg.activation = "relu-normalized";
    cfg.normalize_layers = true;
    cfg.seed = 19;
    auto inputs = unit_pair(0.8);
    DecayResult res = correlation_decay_experiment(cfg, inputs[0], inputs[1], 100);
    for (int h = 0; h <= cfg.depth; ++h) {
        const Stat& s = res.summary.stats[h];
        INFO("depth " << h);
        CHECK(std::abs(s.mean) <=
              bound_B(res.mu, h, res.delta) + 4.0 * s.std_error + 1e-9);
    }
}

TEST_CASE("one-layer minimum singular value") {
    MinSingularResult res = one_layer_min_singular_experiment(4, 512, 0.5, 10, 3);
    CHECK(res.min_sigma_min > 0.0);
    CHECK(res.ratio > 0.0);
    REQUIRE(res.inputs.size() == 4);
    for (const auto& u : res.inputs) {
        for (const auto& v : res.inputs) {
            if (&u == &v) continue;
            double dot = 0.0;
            for (std::size_t c = 0; c < u.size(); ++c) dot += u[c] * v[c];
            CHECK(std::abs(dot) <= 0.5 + 1e-12);
        }
    }
    // single input: sigma_min is just the squared feature norm
    MinSingularResult one = one_layer_min_singular_experiment(1, 256, 0.5, 5, 4);
    CHECK(one.min_sigma_min > 0.0);
    // duplicated inputs give a singular Gram
    std::vector<std::vector<double>> dup = {{1.0, 0.0}, {1.0, 0.0}};
    TrialSummary deg = min_singular_for_inputs(dup, 128, 3, 5);
    for (const auto& s : deg.stats) CHECK(std::abs(s.mean) < 1e-10);
}

TEST_CASE("batch and layer normalization invariance") {
    BnInvarianceResult relu = bn_invariance_check(
        get_activation("relu-normalized"), 32, 64, 11);
    CHECK(relu.max_abs_deviation <= 1e-10);
    // activation already normalized: raw == normalized form, deviation 0
    BnInvarianceResult ident = bn_invariance_check(
        get_activation("hermite2"), 16, 32, 12);
    CHECK(ident.max_abs_deviation == 0.0);

    ActivationSpec constant;
    constant.name = "constant";
    constant.raw = [](double) { return 1.0; };
    CHECK_THROWS_AS(bn_invariance_check(constant, 8, 16, 13), std::runtime_error);
}
