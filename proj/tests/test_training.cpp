#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deepcond/conditioning.hpp"
#include "deepcond/training.hpp"

using namespace deepcond;

namespace {

DualActivation dual_of(const std::string& name) {
    return DualActivation::from_activation(get_activation(name));
}

RegressionProblem identity_design(int n, std::uint64_t seed) {
    RegressionProblem pr = make_conditioned_problem(n, 1.0, seed);
    return pr;
}

}  // namespace

TEST_CASE("conditioned problem hits the requested kappa") {
    RegressionProblem pr = make_conditioned_problem(6, 100.0, 1);
    TrainRun run = gd_top_layer(pr, 0.0, 1);
    CHECK(run.kappa == doctest::Approx(100.0).epsilon(1e-9));
    for (double y : pr.labels) CHECK(std::abs(y) <= 1.0);
}

TEST_CASE("orthonormal design drops the loss by at least e^{1/4} per step") {
    RegressionProblem pr = identity_design(8, 2);
    TrainRun run = gd_top_layer(pr, 0.0, 3);
    REQUIRE(run.loss_trajectory.size() == 4);
    CHECK(run.loss_trajectory[0] > 0.0);
    for (std::size_t t = 1; t < run.loss_trajectory.size(); ++t) {
        CHECK(run.loss_trajectory[t] <=
              std::exp(-0.25) * run.loss_trajectory[t - 1] + 1e-15);
    }
    CHECK(run.rate_ok);
}

TEST_CASE("zero labels stay at zero loss") {
    RegressionProblem pr = identity_design(5, 3);
    std::fill(pr.labels.begin(), pr.labels.end(), 0.0);
    TrainRun run = gd_top_layer(pr, 0.0, 10);
    for (double l : run.loss_trajectory) CHECK(l == 0.0);
}

TEST_CASE("kappa = 100 rate envelope over 2000 steps") {
    RegressionProblem pr = make_conditioned_problem(8, 100.0, 4);
    TrainRun run = gd_top_layer(pr, 0.0, 2000);
    CHECK(run.rate_ok);
    for (std::size_t t = 0; t < run.loss_trajectory.size(); ++t) {
        CHECK(run.loss_trajectory[t] <= run.rate_bound[t] + 1e-9);
    }
}

TEST_CASE("gd with a conservative step is monotone") {
    RegressionProblem pr = make_conditioned_problem(6, 40.0, 5);
    // eta = 1/lambda_max of the Hessian
    double lambda_max_h = 0.0;
    {
        TrainRun probe = gd_top_layer(pr, 0.0, 1);
        // recover lambda_max from the auto step: eta = 2/(hmin + hmax)
        lambda_max_h = 2.0 / probe.step_size;  // hmin + hmax
    }
    TrainRun run = gd_top_layer(pr, 1.0 / lambda_max_h, 200);
    for (std::size_t t = 1; t < run.loss_trajectory.size(); ++t) {
        CHECK(run.loss_trajectory[t] <= run.loss_trajectory[t - 1] + 1e-15);
    }
}

TEST_CASE("singular designs are rejected") {
    RegressionProblem pr;
    pr.n = 2;
    pr.p = 2;
    pr.features = {1.0, 0.0, 1.0, 0.0};  // rank 1
    pr.labels = {1.0, 1.0};
    CHECK_THROWS_AS(gd_top_layer(pr, 0.0, 5), std::domain_error);
    CHECK_THROWS_AS(sgd_top_layer(pr, 1, 1e-2), std::domain_error);
}

TEST_CASE("sgd one-dimensional problem converges in logarithmic epochs") {
    RegressionProblem pr;
    pr.n = 1;
    pr.p = 1;
    pr.features = {2.0};
    pr.labels = {1.0};
    TrainRun run = sgd_top_layer(pr, 9, 1e-4);
    CHECK(run.loss_trajectory.back() <= 1e-4);
    // epoch count = ceil(log2(L0/eps)); epoch length = ceil(8 n beta / lambda)
    double l0 = run.loss_trajectory.front();
    long epochs = static_cast<long>(std::ceil(std::log2(l0 / 1e-4)));
    CHECK(run.iterations == epochs * 8);
}

TEST_CASE("sgd uses eta = 1/(2 beta)") {
    RegressionProblem pr;
    pr.n = 2;
    pr.p = 2;
    pr.features = {1.0, 1.0, 1.0, -1.0};  // row norms^2 = 2
    pr.labels = {0.5, -0.5};
    TrainRun run = sgd_top_layer(pr, 11, 1e-3);
    CHECK(run.step_size == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("halving the target adds one epoch") {
    RegressionProblem pr = make_conditioned_problem(4, 10.0, 6);
    TrainRun coarse = sgd_top_layer(pr, 13, 0.5 * pr.labels[0] * pr.labels[0] + 0.01);
    // pick targets a factor 2 apart and away from the epoch boundaries
    double l0 = coarse.loss_trajectory.front();
    double eps1 = l0 / 3.0, eps2 = l0 / 6.0;
    TrainRun a = sgd_top_layer(pr, 13, eps1);
    TrainRun b = sgd_top_layer(pr, 13, eps2);
    long epoch_steps = a.iterations /
                       std::max<long>(1, static_cast<long>(a.loss_trajectory.size()) - 1);
    CHECK(b.iterations - a.iterations == epoch_steps);
}

TEST_CASE("sgd expected loss meets the target over seeds") {
    RegressionProblem pr = make_conditioned_problem(6, 25.0, 7);
    const double eps = 1e-3;
    const int seeds = 20;
    double mean = 0.0, sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
        TrainRun run = sgd_top_layer(pr, 100 + s, eps);
        double final_loss = run.loss_trajectory.back();
        mean += final_loss;
        sq += final_loss * final_loss;
    }
    mean /= seeds;
    double se = std::sqrt(std::max(0.0, sq / seeds - mean * mean) / (seeds - 1));
    CHECK(mean <= eps + 4.0 * se);
}

TEST_CASE("interpolator closed forms") {
    GramMatrix eye = GramMatrix::identity(4);
    std::vector<double> y = {0.4, -0.2, 0.9, -1.0};
    Interpolator ip = min_norm_interpolator(eye, y);
    double norm_sq = 0.0;
    for (int i = 0; i < 4; ++i) {
        CHECK(ip.dual_weights[i] == doctest::Approx(y[i]).epsilon(1e-14));
        norm_sq += y[i] * y[i];
    }
    CHECK(ip.predictor_norm_sq == doctest::Approx(norm_sq).epsilon(1e-14));

    const double rho = 0.3;
    GramMatrix two = GramMatrix::equicorrelated(2, rho);
    std::vector<double> y2 = {1.0, -0.5};
    Interpolator ip2 = min_norm_interpolator(two, y2);
    const double det = 1.0 - rho * rho;
    CHECK(ip2.dual_weights[0] ==
          doctest::Approx((y2[0] - rho * y2[1]) / det).epsilon(1e-12));
    CHECK(ip2.dual_weights[1] ==
          doctest::Approx((y2[1] - rho * y2[0]) / det).epsilon(1e-12));
}

TEST_CASE("deep kernels interpolate to machine precision") {
    GramMatrix gram = GramMatrix::synthetic(16, 0.1, 8);
    DualActivation d = dual_of("relu-normalized");
    BoundParams p = depth_thresholds(d.mu(), 0.1, 16);
    GramMatrix kbar = propagate_kernel(gram, d, static_cast<int>(p.L1));
    std::vector<double> y(16);
    for (int i = 0; i < 16; ++i) y[i] = std::sin(i * 1.7);
    Interpolator ip = min_norm_interpolator(kbar, y);
    CHECK(ip.max_abs_residual <= 1e-10);

    // noise labels interpolate too
    for (int i = 0; i < 16; ++i) y[i] = (i % 2) ? 1.0 : -1.0;
    CHECK(min_norm_interpolator(kbar, y).max_abs_residual <= 1e-8);
}

TEST_CASE("near-singular kernels are rejected with advice") {
    GramMatrix tight = GramMatrix::equicorrelated(3, 1.0 - 1e-12);
    std::vector<double> y = {1.0, 0.0, -1.0};
    CHECK_THROWS_WITH_AS(min_norm_interpolator(tight, y),
                         doctest::Contains("deepen"), std::runtime_error);
}

TEST_CASE("excess risk with zero labels is exactly zero") {
    RiskEstimate est = excess_risk_estimate(get_activation("relu-normalized"), 0,
                                            24, 100, "zeros", 15);
    CHECK(est.excess_risk == 0.0);
    CHECK(est.predictor_norm == 0.0);
    CHECK(est.train_residual_max == 0.0);
}

TEST_CASE("noise labels still interpolate") {
    RiskEstimate est = excess_risk_estimate(get_activation("relu-normalized"), 0,
                                            24, 50, "noise", 16);
    CHECK(est.train_residual_max <= 1e-8);
}

TEST_CASE("depth improves conditioning and optimization speed") {
    GramMatrix gram = GramMatrix::synthetic(8, 0.05, 33);
    DualActivation d = dual_of("relu-normalized");
    BoundParams p = depth_thresholds(d.mu(), 0.05, 8);
    GramMatrix shallow = propagate_kernel(gram, d, 1);
    GramMatrix deep = propagate_kernel(gram, d, static_cast<int>(p.L1));
    double kappa_shallow = spectrum(shallow).kappa;
    double kappa_deep = spectrum(deep).kappa;
    CHECK(kappa_deep <= kappa_shallow);

    auto steps_to_tolerance = [](const GramMatrix& kb) {
        const int n = kb.size();
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) y[i] = ((i * 37) % 13) / 13.0 - 0.5;
        RegressionProblem pr = make_kernel_problem(kb, y);
        TrainRun run = gd_top_layer(pr, 0.0, 4000);
        for (std::size_t t = 0; t < run.loss_trajectory.size(); ++t) {
            if (run.loss_trajectory[t] <= 1e-6) return static_cast<long>(t);
        }
        return static_cast<long>(run.loss_trajectory.size());
    };
    CHECK(steps_to_tolerance(deep) <= steps_to_tolerance(shallow));
}

TEST_CASE("kernel-space design reproduces the kernel spectrum") {
    GramMatrix gram = GramMatrix::synthetic(8, 0.2, 17);
    DualActivation d = dual_of("relu-normalized");
    GramMatrix kbar = propagate_kernel(gram, d, 6);
    std::vector<double> y(8, 0.25);
    RegressionProblem pr = make_kernel_problem(kbar, y);
    TrainRun run = gd_top_layer(pr, 0.0, 1);
    CHECK(run.kappa == doctest::Approx(spectrum(kbar).kappa).epsilon(1e-9));
}
