// Timing comparison of the OpenMP kernels against their serial reference
// implementations. Run with DEEPCOND_THREADS to pin the budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "deepcond/activation.hpp"
#include "deepcond/dual.hpp"
#include "deepcond/kernels.hpp"
#include "deepcond/network.hpp"
#include "deepcond/parallel.hpp"

using namespace deepcond;

namespace {

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.4f s   parallel %8.4f s   speedup %.2fx\n",
                name, serial, parallel, serial / parallel);
}

}  // namespace

int main() {
    std::printf("thread budget: %d\n", thread_budget());

    // Entrywise dual map over a large matrix.
    {
        const int n = 1500;
        DualActivation d =
            DualActivation::from_activation(get_activation("tanh-normalized"));
        std::vector<double> in(static_cast<std::size_t>(n) * n), out(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) {
            in[i] = std::sin(0.37 * static_cast<double>(i)) * 0.99;
        }
        auto f = [&d](double v) { return d.eval(v); };
        double ts = time_best_of(3, [&] {
            map_entries_serial(std::span<const double>(in), std::span<double>(out), f);
        });
        double tp = time_best_of(3, [&] {
            map_entries(std::span<const double>(in), std::span<double>(out), f);
        });
        report("entrywise dual map", ts, tp);
    }

    // Gram accumulation from features.
    {
        const int n = 96, m = 60000;
        std::vector<double> feats(static_cast<std::size_t>(n) * m);
        for (std::size_t i = 0; i < feats.size(); ++i) {
            feats[i] = std::cos(0.11 * static_cast<double>(i));
        }
        std::vector<double> gram(static_cast<std::size_t>(n) * n);
        double ts = time_best_of(3, [&] {
            gram_from_features_serial(feats.data(), n, m, gram.data());
        });
        double tp = time_best_of(3, [&] {
            gram_from_features(feats.data(), n, m, gram.data());
        });
        report("gram from features", ts, tp);
    }

    // Streamed layer forward (row-regenerated weights).
    {
        NetworkConfig cfg;
        cfg.input_dim = 48;
        cfg.width = 3000;
        cfg.depth = 3;
        cfg.activation = "relu-normalized";
        cfg.seed = 11;
        std::vector<std::vector<double>> inputs(4, std::vector<double>(48, 0.0));
        for (int i = 0; i < 4; ++i) inputs[i][i] = 1.0;
        const int saved = thread_budget();
        set_thread_budget(1);
        double ts = time_best_of(3, [&] { features_streamed(cfg, 0, inputs); });
        set_thread_budget(saved);
        double tp = time_best_of(3, [&] { features_streamed(cfg, 0, inputs); });
        report("streamed layer forward", ts, tp);
    }
    return 0;
}
