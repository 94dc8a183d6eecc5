#include "deepcond/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deepcond/bounds.hpp"
#include "deepcond/conditioning.hpp"
#include "deepcond/dual.hpp"
#include "deepcond/linalg.hpp"
#include "deepcond/rng.hpp"

namespace deepcond {

namespace {

double loss_of(const RegressionProblem& pr, const std::vector<double>& w) {
    double acc = 0.0;
    for (int i = 0; i < pr.n; ++i) {
        double r = -pr.labels[i];
        const double* a = pr.features.data() + static_cast<std::size_t>(i) * pr.p;
        for (int k = 0; k < pr.p; ++k) r += a[k] * w[k];
        acc += r * r;
    }
    return acc / pr.n;
}

std::vector<double> gram_ata(const RegressionProblem& pr) {
    std::vector<double> g(static_cast<std::size_t>(pr.p) * pr.p, 0.0);
    for (int i = 0; i < pr.n; ++i) {
        const double* a = pr.features.data() + static_cast<std::size_t>(i) * pr.p;
        for (int r = 0; r < pr.p; ++r) {
            for (int c = r; c < pr.p; ++c) g[r * pr.p + c] += a[r] * a[c];
        }
    }
    for (int r = 0; r < pr.p; ++r) {
        for (int c = 0; c < r; ++c) g[r * pr.p + c] = g[c * pr.p + r];
    }
    return g;
}

struct DesignSpectrum {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

DesignSpectrum design_spectrum(const RegressionProblem& pr) {
    SymmetricEigen eig = symmetric_eigenvalues(gram_ata(pr), pr.p);
    DesignSpectrum s;
    s.lambda_min = eig.values.front();
    s.lambda_max = eig.values.back();
    if (s.lambda_min <= 0.0) {
        throw std::domain_error(
            "training: singular design (lambda_min(A^T A) <= 0); deepen the "
            "network to condition the features");
    }
    s.kappa = s.lambda_max / s.lambda_min;
    return s;
}

}  // namespace

RegressionProblem make_conditioned_problem(int n, double kappa,
                                           std::uint64_t seed) {
    if (n < 2 || kappa < 1.0) {
        throw std::domain_error("make_conditioned_problem: n >= 2, kappa >= 1");
    }
    RegressionProblem pr;
    pr.n = pr.p = n;
    pr.features.assign(static_cast<std::size_t>(n) * n, 0.0);
    // Diagonal design: singular values sqrt(kappa) down to 1.
    CounterRng rng(seed);
    std::vector<double> w_true(n);
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        double eig = kappa * std::pow(kappa, -t);  // kappa .. 1
        pr.features[static_cast<std::size_t>(i) * n + i] = std::sqrt(eig);
        w_true[i] = rng.uniform(0, 0, i) - 0.5;
    }
    pr.labels.resize(n);
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        pr.labels[i] = pr.features[static_cast<std::size_t>(i) * n + i] * w_true[i];
        max_abs = std::max(max_abs, std::abs(pr.labels[i]));
    }
    if (max_abs > 0.0) {
        for (double& y : pr.labels) y /= max_abs;  // keep |y| <= 1
    }
    return pr;
}

RegressionProblem make_kernel_problem(const GramMatrix& kbar,
                                      const std::vector<double>& labels) {
    const int n = kbar.size();
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("make_kernel_problem: label count mismatch");
    }
    // Cholesky kbar = C C^T; rows of A := C^T give A^T A = kbar.
    std::vector<double> chol = kbar.entries();
    for (int j = 0; j < n; ++j) {
        double diag = chol[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            double v = chol[static_cast<std::size_t>(j) * n + k];
            diag -= v * v;
        }
        if (!(diag > 0.0)) {
            throw std::runtime_error("make_kernel_problem: kernel not positive "
                                     "definite");
        }
        chol[static_cast<std::size_t>(j) * n + j] = std::sqrt(diag);
        for (int i = j + 1; i < n; ++i) {
            double s = chol[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k) {
                s -= chol[static_cast<std::size_t>(i) * n + k] *
                     chol[static_cast<std::size_t>(j) * n + k];
            }
            chol[static_cast<std::size_t>(i) * n + j] =
                s / chol[static_cast<std::size_t>(j) * n + j];
        }
    }
    RegressionProblem pr;
    pr.n = pr.p = n;
    pr.labels = labels;
    pr.features.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            // A[i][k] = C[k][i] for k >= i (lower-triangular C)
            pr.features[static_cast<std::size_t>(i) * n + k] =
                k >= i ? chol[static_cast<std::size_t>(k) * n + i] : 0.0;
        }
    }
    return pr;
}

TrainRun gd_top_layer(const RegressionProblem& pr, double eta, int steps) {
    if (steps < 1) throw std::domain_error("gd: steps must be >= 1");
    DesignSpectrum sp = design_spectrum(pr);
    TrainRun run;
    run.kappa = sp.kappa;
    // Hessian of the (1/n)-scaled loss is (2/n) A^T A.
    const double h_min = 2.0 * sp.lambda_min / pr.n;
    const double h_max = 2.0 * sp.lambda_max / pr.n;
    run.step_size = eta > 0.0 ? eta : 2.0 / (h_min + h_max);
    run.iterations = steps;

    std::vector<double> w(pr.p, 0.0), grad(pr.p);
    run.loss_trajectory.reserve(steps + 1);
    run.loss_trajectory.push_back(loss_of(pr, w));
    for (int t = 0; t < steps; ++t) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < pr.n; ++i) {
            const double* a = pr.features.data() + static_cast<std::size_t>(i) * pr.p;
            double r = -pr.labels[i];
            for (int k = 0; k < pr.p; ++k) r += a[k] * w[k];
            const double c = 2.0 * r / pr.n;
            for (int k = 0; k < pr.p; ++k) grad[k] += c * a[k];
        }
        for (int k = 0; k < pr.p; ++k) w[k] -= run.step_size * grad[k];
        run.loss_trajectory.push_back(loss_of(pr, w));
    }
    run.rate_bound.resize(run.loss_trajectory.size());
    const double l0 = run.loss_trajectory.front();
    for (std::size_t t = 0; t < run.rate_bound.size(); ++t) {
        run.rate_bound[t] = std::exp(-static_cast<double>(t) / (4.0 * run.kappa)) * l0;
        if (run.loss_trajectory[t] > run.rate_bound[t] + 1e-9) run.rate_ok = false;
    }
    return run;
}

TrainRun sgd_top_layer(const RegressionProblem& pr, std::uint64_t seed,
                       double eps) {
    if (!(eps > 0.0)) throw std::domain_error("sgd: eps must be > 0");
    DesignSpectrum sp = design_spectrum(pr);
    double beta = 0.0;
    for (int i = 0; i < pr.n; ++i) {
        double norm_sq = 0.0;
        const double* a = pr.features.data() + static_cast<std::size_t>(i) * pr.p;
        for (int k = 0; k < pr.p; ++k) norm_sq += a[k] * a[k];
        beta = std::max(beta, norm_sq);
    }
    TrainRun run;
    run.kappa = sp.kappa;
    run.step_size = 1.0 / (2.0 * beta);
    const long epoch_steps =
        static_cast<long>(std::ceil(8.0 * pr.n * beta / sp.lambda_min));

    CounterRng rng(seed);
    std::vector<double> w(pr.p, 0.0), avg(pr.p);
    double loss = loss_of(pr, w);
    run.loss_trajectory.push_back(loss);
    const long epochs =
        loss <= eps ? 0
                    : static_cast<long>(std::ceil(std::log2(loss / eps)));
    std::uint64_t counter = 0;
    for (long e = 0; e < epochs; ++e) {
        std::fill(avg.begin(), avg.end(), 0.0);
        for (long t = 0; t < epoch_steps; ++t) {
            const int i = std::min<int>(
                pr.n - 1,
                static_cast<int>(rng.uniform(0, 0, counter++) * pr.n));
            const double* a =
                pr.features.data() + static_cast<std::size_t>(i) * pr.p;
            double r = -pr.labels[i];
            for (int k = 0; k < pr.p; ++k) r += a[k] * w[k];
            const double c = 2.0 * r * run.step_size;
            for (int k = 0; k < pr.p; ++k) w[k] -= c * a[k];
            for (int k = 0; k < pr.p; ++k) avg[k] += w[k];
        }
        for (int k = 0; k < pr.p; ++k) w[k] = avg[k] / epoch_steps;
        run.loss_trajectory.push_back(loss_of(pr, w));
        run.iterations += epoch_steps;
    }
    return run;
}

Interpolator min_norm_interpolator(const GramMatrix& kbar,
                                   const std::vector<double>& labels) {
    const int n = kbar.size();
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("interpolator: label count mismatch");
    }
    kbar.validate();
    SpectrumSummary sp = spectrum(kbar);
    if (sp.lambda_min <= 1e-10) {
        throw std::runtime_error(
            "interpolator: kernel matrix is numerically singular (lambda_min <= "
            "1e-10); deepen the network");
    }
    if (sp.kappa > 1e12) {
        throw std::runtime_error(
            "interpolator: kernel condition number above 1e12; deepen the "
            "network");
    }
    Interpolator out;
    out.dual_weights = spd_solve(kbar.entries(), n, labels);
    out.train_residuals.resize(n);
    for (int i = 0; i < n; ++i) {
        double r = -labels[i];
        for (int j = 0; j < n; ++j) r += kbar.at(i, j) * out.dual_weights[j];
        out.train_residuals[i] = r;
        out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
        out.predictor_norm_sq += labels[i] * out.dual_weights[i];
    }
    if (out.max_abs_residual > 1e-8) {
        throw std::runtime_error("interpolator: residuals above 1e-8 after "
                                 "refinement");
    }
    return out;
}

namespace {

struct SphereSample {
    std::vector<std::vector<double>> points;
    std::vector<double> labels;
};

SphereSample sample_sphere(int count, int dim, const std::string& target,
                           std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed);
    SphereSample s;
    s.points.assign(count, std::vector<double>(dim));
    s.labels.assign(count, 0.0);
    // Fixed unit target direction for the "linear" labels.
    std::vector<double> w_star(dim);
    double wn = 0.0;
    for (int c = 0; c < dim; ++c) {
        w_star[c] = rng.normal(1, 0, c);
        wn += w_star[c] * w_star[c];
    }
    for (double& v : w_star) v /= std::sqrt(wn);

    for (int i = 0; i < count; ++i) {
        double norm_sq = 0.0;
        for (int c = 0; c < dim; ++c) {
            double v = rng.normal(stream, 1, static_cast<std::uint64_t>(i) * dim + c);
            s.points[i][c] = v;
            norm_sq += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        double y = 0.0;
        for (int c = 0; c < dim; ++c) {
            s.points[i][c] *= inv;
            y += s.points[i][c] * w_star[c];
        }
        if (target == "linear") {
            s.labels[i] = y;
        } else if (target == "noise") {
            s.labels[i] = rng.uniform(stream, 2, i) < 0.5 ? -1.0 : 1.0;
        } else if (target == "zeros") {
            s.labels[i] = 0.0;
        } else {
            throw std::invalid_argument("unknown target '" + target +
                                        "' (zeros, linear, noise)");
        }
    }
    return s;
}

double composed_eval(const DualActivation& d, double rho, int depth) {
    double r = std::clamp(rho, -1.0, 1.0);
    for (int l = 0; l < depth; ++l) r = std::clamp(d.eval(r), -1.0, 1.0);
    return r;
}

}  // namespace

RiskEstimate excess_risk_estimate(const ActivationSpec& spec, int depth, int n,
                                  int n_test, const std::string& target,
                                  std::uint64_t seed) {
    if (n < 2 || n_test < 2) {
        throw std::domain_error("excess_risk: n and n_test must be >= 2");
    }
    // Wide enough that a few hundred random unit inputs stay well separated.
    const int dim = 64;
    DualActivation d = DualActivation::from_activation(spec);

    SphereSample train = sample_sphere(n, dim, target, seed, 10);
    SphereSample reference = sample_sphere(4 * n, dim, target, seed, 11);
    SphereSample test = sample_sphere(n_test, dim, target, seed, 12);

    GramMatrix k_train = GramMatrix::from_vectors(train.points);
    RiskEstimate out;
    out.delta = std::min(1.0 - k_train.max_abs_off_diagonal(), 1.0 - 1e-12);
    out.depth = depth > 0 ? depth
                          : static_cast<int>(
                                depth_thresholds(d.mu(), out.delta, n).L1);

    auto fit = [&](const SphereSample& sample) {
        GramMatrix g = GramMatrix::from_vectors(sample.points);
        GramMatrix kb = propagate_kernel(g, d, out.depth);
        return min_norm_interpolator(kb, sample.labels);
    };
    Interpolator model = fit(train);
    Interpolator ref_model = fit(reference);
    out.train_residual_max = model.max_abs_residual;
    out.predictor_norm = std::sqrt(std::max(0.0, model.predictor_norm_sq));

    auto predict = [&](const Interpolator& m,
                       const std::vector<std::vector<double>>& pts,
                       const std::vector<double>& x) {
        double f = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double rho = 0.0;
            for (int c = 0; c < dim; ++c) rho += pts[i][c] * x[c];
            f += m.dual_weights[i] * composed_eval(d, rho, out.depth);
        }
        return f;
    };

    double risk = 0.0, ref_risk = 0.0;
    std::vector<double> paired(n_test);
    for (int t = 0; t < n_test; ++t) {
        double fs = predict(model, train.points, test.points[t]);
        double fr = predict(ref_model, reference.points, test.points[t]);
        double es = (fs - test.labels[t]) * (fs - test.labels[t]);
        double er = (fr - test.labels[t]) * (fr - test.labels[t]);
        risk += es;
        ref_risk += er;
        paired[t] = es - er;
    }
    risk /= n_test;
    ref_risk /= n_test;
    out.risk = risk;
    out.reference_risk = ref_risk;
    out.excess_risk = risk - ref_risk;
    double var = 0.0;
    for (double v : paired) var += (v - out.excess_risk) * (v - out.excess_risk);
    out.std_error = std::sqrt(var / (n_test - 1)) / std::sqrt(double(n_test));
    return out;
}

}  // namespace deepcond
