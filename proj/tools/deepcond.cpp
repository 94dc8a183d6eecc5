// Command-line frontend: every analysis as a subcommand with reproducible
// seeded runs and CSV/JSON emission.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "deepcond/bounds.hpp"
#include "deepcond/conditioning.hpp"
#include "deepcond/dual.hpp"
#include "deepcond/experiments.hpp"
#include "deepcond/gram.hpp"
#include "deepcond/network.hpp"
#include "deepcond/output.hpp"
#include "deepcond/parallel.hpp"
#include "deepcond/training.hpp"

namespace dc = deepcond;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string output;  // empty: stdout
    std::string format = "csv";
    std::uint64_t seed = 0;
    int threads = 0;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--output", o.output, "output file (default: stdout)");
    cmd->add_option("--format", o.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", o.seed, "random seed")->envname("DEEPCOND_SEED");
    cmd->add_option("--threads", o.threads, "worker thread budget")
        ->envname("DEEPCOND_THREADS");
    cmd->add_option("--config", o.config_path, "JSON config file (flags win)");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(std::stod(item));
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) out.push_back(std::stoi(item));
    return out;
}

void emit(const CommonOpts& o, const std::string& config, const std::string& body) {
    std::string text = dc::provenance_header(config, o.seed) + body;
    if (o.output.empty()) {
        std::cout << text;
    } else {
        dc::atomic_write(o.output, text);
    }
}

// Shared failure channel: machine-readable JSON on stdout, nonzero exit.
int fail_json(const std::string& command, const std::string& reason) {
    json j;
    j["status"] = "fail";
    j["command"] = command;
    j["reason"] = reason;
    std::cout << j.dump() << "\n";
    return 1;
}

dc::GramMatrix resolve_gram(const std::string& input, int synthetic_n,
                            double delta, std::uint64_t seed) {
    if (!input.empty()) return dc::GramMatrix::load(input);
    if (synthetic_n < 1) {
        throw std::invalid_argument(
            "either --input or --synthetic-n must be given");
    }
    return dc::GramMatrix::synthetic(synthetic_n, delta, seed);
}

std::string join_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        if (!out.empty()) out += ' ';
        out += k + "=" + v;
    }
    return out;
}

// --- dual-table ------------------------------------------------------------

int run_dual_table(const CommonOpts& o, const std::string& activations,
                   const std::string& rho_points) {
    auto names = split_list(activations);
    if (names.empty()) {
        throw CLI::ValidationError("--activations", "at least one activation");
    }
    std::vector<double> grid = parse_doubles(rho_points);
    std::vector<std::string> cols = {"activation", "mu", "muTilde"};
    for (double r : grid) cols.push_back("sigmaHat(" + dc::format_full(r) + ")");
    dc::CsvBuilder csv(cols);
    json rows = json::array();
    for (const auto& name : names) {
        const dc::ActivationSpec& spec = dc::get_activation(name);
        dc::DualActivation d = dc::DualActivation::from_activation(spec);
        std::vector<std::string> row = {name, dc::format_full(d.mu()),
                                        dc::format_full(d.mu_tilde())};
        json jrow = {{"activation", name}, {"mu", d.mu()}, {"muTilde", d.mu_tilde()}};
        json values = json::array();
        for (double r : grid) {
            double v = d.eval(r);
            row.push_back(dc::format_full(v));
            values.push_back(v);
        }
        jrow["sigmaHat"] = values;
        jrow["rho"] = grid;
        csv.add_row(row);
        rows.push_back(jrow);
    }
    const std::string config =
        join_config({{"cmd", "dual-table"},
                     {"activations", activations},
                     {"rho", rho_points}});
    emit(o, config, o.format == "json" ? rows.dump(2) + "\n" : csv.str());
    return 0;
}

// --- profile ----------------------------------------------------------------

int run_profile(const CommonOpts& o, const std::string& kind,
                const std::string& input, int synthetic_n, double delta,
                const std::string& activation, int lmax) {
    dc::GramMatrix gram = resolve_gram(input, synthetic_n, delta, o.seed);
    dc::DualActivation d =
        dc::DualActivation::from_activation(dc::get_activation(activation));
    dc::DepthProfile profile = kind == "ntk" ? dc::verify_ntk(gram, d, lmax)
                                             : dc::verify_top_layer(gram, d, lmax);
    dc::CsvBuilder csv({"L", "maxOffDiag", "lambdaMin", "lambdaMax", "kappa",
                        "boundB", "boundKappa"});
    for (const auto& rec : profile.per_depth) {
        csv.add_numeric_row({static_cast<double>(rec.depth), rec.max_off_diag,
                             rec.lambda_min, rec.lambda_max, rec.kappa,
                             rec.bound_b, rec.bound_kappa});
    }
    const std::string config = join_config(
        {{"cmd", "profile"},
         {"kind", kind},
         {"input", input.empty() ? "synthetic" : input},
         {"n", std::to_string(gram.size())},
         {"delta", dc::format_full(delta)},
         {"activation", activation},
         {"lmax", std::to_string(lmax)},
         {"mu", dc::format_full(profile.mu)},
         {"deltaSep", dc::format_full(profile.delta_sep)},
         {"deltaNs", dc::format_full(profile.delta_ns)}});
    if (o.format == "json") {
        json j;
        j["kind"] = kind;
        j["mu"] = profile.mu;
        j["muZero"] = profile.mu_zero;
        j["deltaSep"] = profile.delta_sep;
        j["deltaNs"] = profile.delta_ns;
        j["boundsRespected"] = profile.bounds_respected();
        j["violations"] = profile.violations;
        json rows = json::array();
        for (const auto& rec : profile.per_depth) {
            rows.push_back({{"L", rec.depth},
                            {"maxOffDiag", rec.max_off_diag},
                            {"lambdaMin", rec.lambda_min},
                            {"lambdaMax", rec.lambda_max},
                            {"kappa", rec.kappa},
                            {"boundB", rec.bound_b},
                            {"boundKappa", rec.bound_kappa}});
        }
        j["perDepth"] = rows;
        emit(o, config, j.dump(2) + "\n");
    } else {
        emit(o, config, csv.str());
    }
    std::cout << "bounds-respected "
              << (profile.bounds_respected() ? "true" : "false") << "\n";
    if (!profile.bounds_respected()) {
        return fail_json("profile", profile.violations.front());
    }
    return 0;
}

// --- simulate ---------------------------------------------------------------

int run_simulate_decay(const CommonOpts& o, const std::string& activation,
                       int m, int layers, double rho, int trials) {
    dc::NetworkConfig cfg;
    cfg.input_dim = 2;
    cfg.width = m;
    cfg.depth = layers;
    cfg.activation = activation;
    cfg.normalize_layers = true;
    cfg.seed = o.seed;
    std::vector<double> x = {1.0, 0.0};
    std::vector<double> y = {rho, std::sqrt(std::max(0.0, 1.0 - rho * rho))};
    dc::DecayResult res = dc::correlation_decay_experiment(cfg, x, y, trials);

    bool ok = true;
    dc::CsvBuilder csv({"h", "meanRho", "stdError", "boundB", "trials"});
    for (int h = 0; h <= layers; ++h) {
        const dc::Stat& s = res.summary.stats[h];
        double bound = res.mu > 0.0 ? dc::bound_B(res.mu, h, res.delta)
                                    : std::numeric_limits<double>::infinity();
        if (std::abs(s.mean) > bound + 4.0 * s.std_error + 1e-9) ok = false;
        csv.add_numeric_row({static_cast<double>(h), s.mean, s.std_error, bound,
                             static_cast<double>(s.trials)});
    }
    const std::string config = join_config(
        {{"cmd", "simulate-decay"},
         {"activation", activation},
         {"m", std::to_string(m)},
         {"L", std::to_string(layers)},
         {"rho", dc::format_full(rho)},
         {"trials", std::to_string(trials)},
         {"mu", dc::format_full(res.mu)},
         {"fittedRate", dc::format_full(res.fitted_rate)},
         {"rateReference", dc::format_full(1.0 - res.mu / 4.0)}});
    emit(o, config, csv.str());
    std::cout << "decay-envelope " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("simulate decay", "mean correlation exceeded the envelope");
}

int run_simulate_kernel(const CommonOpts& o, const std::string& activation,
                        const std::string& widths, int n, int layers,
                        double delta, int trials) {
    dc::DualActivation d =
        dc::DualActivation::from_activation(dc::get_activation(activation));
    dc::GramMatrix gram = dc::GramMatrix::synthetic(n, delta, o.seed);
    std::vector<std::vector<double>> inputs = gram.realize_unit_vectors();
    dc::GramMatrix ideal = dc::propagate_kernel(gram, d, layers);

    dc::CsvBuilder csv({"m", "meanAbsError", "maxAbsError", "maxSigmaGap", "trials"});
    std::vector<double> errs;
    bool within_se = true;
    for (int m : parse_ints(widths)) {
        dc::NetworkConfig cfg;
        cfg.input_dim = n;
        cfg.width = m;
        cfg.depth = layers;
        cfg.activation = activation;
        cfg.seed = o.seed;
        std::vector<std::vector<std::vector<double>>> grams(trials);
        for (int t = 0; t < trials; ++t) {
            grams[t].assign(n, std::vector<double>(n));
            dc::GramMatrix g = dc::empirical_kernel_streamed(cfg, t, inputs);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) grams[t][i][j] = g.at(i, j);
            }
        }
        double mean_abs = 0.0, max_abs = 0.0, max_gap = 0.0;
        int cells = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double mean = 0.0;
                for (int t = 0; t < trials; ++t) mean += grams[t][i][j];
                mean /= trials;
                double var = 0.0;
                for (int t = 0; t < trials; ++t) {
                    double dv = grams[t][i][j] - mean;
                    var += dv * dv;
                }
                double se = trials > 1
                                ? std::sqrt(var / (trials - 1)) / std::sqrt(double(trials))
                                : 0.0;
                double err = std::abs(mean - ideal.at(i, j));
                mean_abs += err;
                max_abs = std::max(max_abs, err);
                if (se > 0.0) max_gap = std::max(max_gap, err / se);
                ++cells;
            }
        }
        mean_abs /= cells;
        errs.push_back(mean_abs);
        if (m == parse_ints(widths).back() && max_gap > 5.0) within_se = false;
        csv.add_numeric_row({static_cast<double>(m), mean_abs, max_abs, max_gap,
                             static_cast<double>(trials)});
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        if (errs[i] > errs[i - 1]) decreasing = false;
    }
    const std::string config = join_config({{"cmd", "simulate-kernel"},
                                            {"activation", activation},
                                            {"m", widths},
                                            {"n", std::to_string(n)},
                                            {"L", std::to_string(layers)},
                                            {"delta", dc::format_full(delta)},
                                            {"trials", std::to_string(trials)}});
    emit(o, config, csv.str());
    bool ok = decreasing && within_se;
    std::cout << "kernel-concentration " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("simulate kernel", "concentration check failed");
}

int run_simulate_ntk(const CommonOpts& o, const std::string& activation, int m,
                     int n, int layers, double delta, int trials) {
    dc::DualActivation d =
        dc::DualActivation::from_activation(dc::get_activation(activation));
    dc::GramMatrix gram = dc::GramMatrix::synthetic(n, delta, o.seed);
    std::vector<std::vector<double>> inputs = gram.realize_unit_vectors();
    dc::GramMatrix ideal = dc::ntk_matrix(gram, d, layers);

    dc::NetworkConfig cfg;
    cfg.input_dim = n;
    cfg.width = m;
    cfg.depth = layers;
    cfg.activation = activation;
    cfg.seed = o.seed;
    double max_gap = 0.0;
    std::vector<std::vector<std::vector<double>>> samples(trials);
    for (int t = 0; t < trials; ++t) {
        dc::NetworkSample net = dc::sample_network(cfg, t);
        dc::GramMatrix g = dc::empirical_ntk(net, inputs);
        samples[t].assign(n, std::vector<double>(n));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) samples[t][i][j] = g.at(i, j);
        }
    }
    dc::CsvBuilder csv({"i", "j", "mean", "stdError", "ideal", "sigmaGap"});
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double mean = 0.0;
            for (int t = 0; t < trials; ++t) mean += samples[t][i][j];
            mean /= trials;
            double var = 0.0;
            for (int t = 0; t < trials; ++t) {
                double dv = samples[t][i][j] - mean;
                var += dv * dv;
            }
            double se = std::sqrt(var / (trials - 1)) / std::sqrt(double(trials));
            double gap = se > 0.0 ? std::abs(mean - ideal.at(i, j)) / se : 0.0;
            max_gap = std::max(max_gap, gap);
            csv.add_numeric_row({static_cast<double>(i), static_cast<double>(j),
                                 mean, se, ideal.at(i, j), gap});
        }
    }
    const std::string config = join_config({{"cmd", "simulate-ntk"},
                                            {"activation", activation},
                                            {"m", std::to_string(m)},
                                            {"n", std::to_string(n)},
                                            {"L", std::to_string(layers)},
                                            {"delta", dc::format_full(delta)},
                                            {"trials", std::to_string(trials)}});
    emit(o, config, csv.str());
    bool ok = max_gap <= 5.0;
    std::cout << "ntk-concentration " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("simulate ntk", "entry beyond 5 standard errors");
}

int run_simulate_sigma_min(const CommonOpts& o, int n, int m, double delta,
                           int trials) {
    dc::MinSingularResult res =
        dc::one_layer_min_singular_experiment(n, m, delta, trials, o.seed);
    dc::CsvBuilder csv({"trial", "sigmaMin"});
    for (int t = 0; t < trials; ++t) {
        csv.add_numeric_row({static_cast<double>(t), res.per_trial.stats[t].mean});
    }
    const std::string config = join_config(
        {{"cmd", "simulate-sigma-min"},
         {"n", std::to_string(n)},
         {"m", std::to_string(m)},
         {"delta", dc::format_full(delta)},
         {"trials", std::to_string(trials)},
         {"minSigmaMin", dc::format_full(res.min_sigma_min)},
         {"theoryScale", dc::format_full(res.theory_scale)},
         {"ratio", dc::format_full(res.ratio)}});
    emit(o, config, csv.str());
    bool ok = res.min_sigma_min > 0.0;
    std::cout << "sigma-min-positive " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("simulate sigma-min", "singular empirical Gram");
}

int run_simulate_bn(const CommonOpts& o, const std::string& activation,
                    int batch, int m) {
    dc::BnInvarianceResult res = dc::bn_invariance_check(
        dc::get_activation(activation), batch, m, o.seed);
    dc::CsvBuilder csv({"bnDeviation", "lnDeviation", "maxAbsDeviation"});
    csv.add_numeric_row({res.bn_deviation, res.ln_deviation, res.max_abs_deviation});
    const std::string config = join_config({{"cmd", "simulate-bn-invariance"},
                                            {"activation", activation},
                                            {"batch", std::to_string(batch)},
                                            {"m", std::to_string(m)}});
    emit(o, config, csv.str());
    bool ok = res.max_abs_deviation <= 1e-10;
    std::cout << "bn-invariance " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("simulate bn-invariance", "deviation above 1e-10");
}

// --- train ------------------------------------------------------------------

dc::RegressionProblem problem_from_flags(const CommonOpts& o, double kappa,
                                         int n, double delta,
                                         const std::string& activation,
                                         const std::string& depth_flag,
                                         int* depth_out) {
    if (kappa > 0.0) {
        if (depth_out) *depth_out = 0;
        return dc::make_conditioned_problem(n, kappa, o.seed);
    }
    dc::GramMatrix gram = dc::GramMatrix::synthetic(n, delta, o.seed);
    dc::DualActivation d =
        dc::DualActivation::from_activation(dc::get_activation(activation));
    int depth;
    if (depth_flag == "L1") {
        depth = static_cast<int>(dc::depth_thresholds(d.mu(), delta, n).L1);
    } else {
        depth = std::stoi(depth_flag);
    }
    if (depth_out) *depth_out = depth;
    dc::GramMatrix kbar = dc::propagate_kernel(gram, d, depth);
    // Linear labels in the kernel feature space.
    std::vector<double> y(n);
    dc::CounterRng rng(o.seed);
    for (int i = 0; i < n; ++i) y[i] = 2.0 * rng.uniform(7, 0, i) - 1.0;
    return dc::make_kernel_problem(kbar, y);
}

int run_train_gd(const CommonOpts& o, double kappa, int n, double delta,
                 const std::string& activation, const std::string& depth_flag,
                 double eta, int steps) {
    int depth = 0;
    dc::RegressionProblem pr =
        problem_from_flags(o, kappa, n, delta, activation, depth_flag, &depth);
    dc::TrainRun run = dc::gd_top_layer(pr, eta, steps);
    dc::CsvBuilder csv({"iteration", "loss", "rateBound"});
    for (std::size_t t = 0; t < run.loss_trajectory.size(); ++t) {
        csv.add_numeric_row({static_cast<double>(t), run.loss_trajectory[t],
                             run.rate_bound[t]});
    }
    const std::string config = join_config(
        {{"cmd", "train-gd"},
         {"kappa", dc::format_full(run.kappa)},
         {"n", std::to_string(n)},
         {"depth", std::to_string(depth)},
         {"eta", dc::format_full(run.step_size)},
         {"steps", std::to_string(steps)}});
    emit(o, config, csv.str());
    std::cout << "rate-envelope " << (run.rate_ok ? "true" : "false") << "\n";
    return run.rate_ok ? 0 : fail_json("train gd", "loss exceeded the rate envelope");
}

int run_train_sgd(const CommonOpts& o, double kappa, int n, double delta,
                  const std::string& activation, const std::string& depth_flag,
                  double eps, int seeds) {
    int depth = 0;
    dc::RegressionProblem pr =
        problem_from_flags(o, kappa, n, delta, activation, depth_flag, &depth);
    dc::CsvBuilder csv({"seed", "steps", "finalLoss"});
    double mean = 0.0, mean_sq = 0.0;
    long steps = 0;
    for (int s = 0; s < seeds; ++s) {
        dc::TrainRun run = dc::sgd_top_layer(pr, o.seed + s, eps);
        double final_loss = run.loss_trajectory.back();
        csv.add_numeric_row({static_cast<double>(s),
                             static_cast<double>(run.iterations), final_loss});
        mean += final_loss;
        mean_sq += final_loss * final_loss;
        steps = run.iterations;
    }
    mean /= seeds;
    double se = seeds > 1 ? std::sqrt(std::max(0.0, mean_sq / seeds - mean * mean) /
                                      (seeds - 1))
                          : 0.0;
    bool ok = mean <= eps + 4.0 * se;
    const std::string config = join_config({{"cmd", "train-sgd"},
                                            {"n", std::to_string(n)},
                                            {"eps", dc::format_full(eps)},
                                            {"seeds", std::to_string(seeds)},
                                            {"steps", std::to_string(steps)},
                                            {"meanFinalLoss", dc::format_full(mean)}});
    emit(o, config, csv.str());
    std::cout << "sgd-rate " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("train sgd", "mean final loss above target");
}

int run_train_interpolate(const CommonOpts& o, int n, double delta,
                          const std::string& activation,
                          const std::string& depth_flag,
                          const std::string& labels) {
    dc::GramMatrix gram = dc::GramMatrix::synthetic(n, delta, o.seed);
    dc::DualActivation d =
        dc::DualActivation::from_activation(dc::get_activation(activation));
    int depth = depth_flag == "L1"
                    ? static_cast<int>(dc::depth_thresholds(d.mu(), delta, n).L1)
                    : std::stoi(depth_flag);
    dc::GramMatrix kbar = dc::propagate_kernel(gram, d, depth);
    std::vector<double> y(n, 0.0);
    dc::CounterRng rng(o.seed);
    for (int i = 0; i < n; ++i) {
        if (labels == "linear") {
            y[i] = 2.0 * rng.uniform(7, 0, i) - 1.0;
        } else if (labels == "noise") {
            y[i] = rng.uniform(7, 1, i) < 0.5 ? -1.0 : 1.0;
        }
    }
    dc::Interpolator ip = dc::min_norm_interpolator(kbar, y);
    dc::CsvBuilder csv({"i", "dualWeight", "residual"});
    for (int i = 0; i < n; ++i) {
        csv.add_numeric_row({static_cast<double>(i), ip.dual_weights[i],
                             ip.train_residuals[i]});
    }
    const std::string config = join_config(
        {{"cmd", "train-interpolate"},
         {"n", std::to_string(n)},
         {"depth", std::to_string(depth)},
         {"labels", labels},
         {"maxResidual", dc::format_full(ip.max_abs_residual)},
         {"predictorNormSq", dc::format_full(ip.predictor_norm_sq)}});
    emit(o, config, csv.str());
    bool ok = ip.max_abs_residual <= 1e-8;
    std::cout << "interpolation " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("train interpolate", "residual above 1e-8");
}

int run_train_risk(const CommonOpts& o, const std::string& sizes, int n_test,
                   const std::string& activation, const std::string& target) {
    const dc::ActivationSpec& spec = dc::get_activation(activation);
    dc::CsvBuilder csv({"n", "excessRisk", "stdError", "predictorNorm", "depth",
                        "delta"});
    std::vector<dc::RiskEstimate> estimates;
    for (int n : parse_ints(sizes)) {
        dc::RiskEstimate est =
            dc::excess_risk_estimate(spec, 0, n, n_test, target, o.seed);
        estimates.push_back(est);
        csv.add_numeric_row({static_cast<double>(n), est.excess_risk,
                             est.std_error, est.predictor_norm,
                             static_cast<double>(est.depth), est.delta});
    }
    bool ok = true;
    for (std::size_t i = 1; i < estimates.size(); ++i) {
        double slack = 2.0 * std::sqrt(estimates[i].std_error * estimates[i].std_error +
                                       estimates[i - 1].std_error *
                                           estimates[i - 1].std_error);
        if (estimates[i].excess_risk > estimates[i - 1].excess_risk + slack) {
            ok = false;
        }
    }
    const std::string config = join_config({{"cmd", "train-risk"},
                                            {"n", sizes},
                                            {"nTest", std::to_string(n_test)},
                                            {"activation", activation},
                                            {"target", target}});
    emit(o, config, csv.str());
    std::cout << "risk-trend " << (ok ? "true" : "false") << "\n";
    return ok ? 0 : fail_json("train risk", "excess risk increased beyond 2 SE");
}

// --- normrelu ---------------------------------------------------------------

int run_normrelu(const CommonOpts& o, double c) {
    dc::NormReluConstants k = dc::normrelu_constants(c);
    const double alpha_minus = 2.0 * dc::normrelu_norm_transfer(0.5, c) - 1.0;
    const double alpha_plus = 1.0 - dc::normrelu_norm_transfer_derivative(1.0, c);
    json j;
    j["c"] = c;
    j["b"] = k.b;
    j["lambda"] = k.lambda;
    j["mu"] = k.mu;
    j["alphaMinus"] = alpha_minus;
    j["alphaPlus"] = alpha_plus;
    j["deltaPrime"] = std::max(dc::normrelu_bias(0.5, c) / alpha_minus,
                               dc::normrelu_bias(2.0, c) / alpha_plus);
    j["bias(0.5)"] = dc::normrelu_bias(0.5, c);
    j["bias(2)"] = dc::normrelu_bias(2.0, c);
    const std::string config =
        join_config({{"cmd", "normrelu"}, {"c", dc::format_full(c)}});
    if (o.format == "json") {
        emit(o, config, j.dump(2) + "\n");
    } else {
        dc::CsvBuilder csv({"c", "b", "lambda", "mu", "alphaMinus", "alphaPlus",
                            "bias05", "bias2"});
        csv.add_numeric_row({c, k.b, k.lambda, k.mu, alpha_minus, alpha_plus,
                             dc::normrelu_bias(0.5, c), dc::normrelu_bias(2.0, c)});
        emit(o, config, csv.str());
    }
    return 0;
}

// JSON config file: keys become --key options unless already on the command
// line (flags win). Unknown keys surface as CLI parse errors.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (!args.empty() && args.back().rfind("--config=", 0) == 0) {
        path = args.back().substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j = json::parse(in);
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string flag = "--" + it.key();
        bool present = false;
        for (const auto& a : args) {
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        }
        if (!present) {
            std::string value = it.value().is_string()
                                    ? it.value().get<std::string>()
                                    : it.value().dump();
            args.push_back(flag + "=" + value);
        }
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infinite-width kernel and NTK conditioning toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;

    // dual-table
    auto* cmd_dual = app.add_subcommand(
        "dual-table", "dual activation samples and non-linearity coefficients");
    std::string activations, rho_points = "-0.8,-0.4,0,0.4,0.8";
    cmd_dual->add_option("--activations", activations,
                         "comma-separated activation names")->required();
    cmd_dual->add_option("--rho-points", rho_points, "correlation grid");
    add_common(cmd_dual, opts);

    // profile
    auto* cmd_profile =
        app.add_subcommand("profile", "depth profile with analytic envelope checks");
    std::string kind = "toplayer", input, activation = "relu-normalized";
    int synthetic_n = 0, lmax = 40;
    double delta = 0.1;
    cmd_profile->add_option("--kind", kind)->check(CLI::IsMember({"toplayer", "ntk"}));
    cmd_profile->add_option("--input", input, "Gram matrix file (.csv or .json)");
    cmd_profile->add_option("--synthetic-n", synthetic_n, "synthesize n inputs");
    cmd_profile->add_option("--delta", delta, "separation for synthetic inputs");
    cmd_profile->add_option("--activation", activation);
    cmd_profile->add_option("--lmax", lmax);
    add_common(cmd_profile, opts);

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "finite-width experiments");
    cmd_sim->require_subcommand(1);
    std::string sim_activation = "relu-normalized", widths = "256,1024,4096";
    int sim_m = 2048, sim_L = 40, sim_trials = 200, sim_n = 4, sim_batch = 32;
    double sim_rho = 0.8, sim_delta = 0.2;
    auto* sim_decay = cmd_sim->add_subcommand("decay", "pairwise correlation by depth");
    sim_decay->add_option("--activation", sim_activation);
    sim_decay->add_option("--m", sim_m);
    sim_decay->add_option("--L", sim_L);
    sim_decay->add_option("--rho", sim_rho);
    sim_decay->add_option("--trials", sim_trials);
    add_common(sim_decay, opts);
    auto* sim_kernel = cmd_sim->add_subcommand("kernel", "kernel concentration sweep");
    sim_kernel->add_option("--activation", sim_activation);
    sim_kernel->add_option("--m", widths, "comma-separated width sweep");
    sim_kernel->add_option("--n", sim_n);
    sim_kernel->add_option("--L", sim_L);
    sim_kernel->add_option("--delta", sim_delta);
    sim_kernel->add_option("--trials", sim_trials);
    add_common(sim_kernel, opts);
    auto* sim_ntk = cmd_sim->add_subcommand("ntk", "NTK concentration");
    sim_ntk->add_option("--activation", sim_activation);
    sim_ntk->add_option("--m", sim_m);
    sim_ntk->add_option("--n", sim_n);
    sim_ntk->add_option("--L", sim_L);
    sim_ntk->add_option("--delta", sim_delta);
    sim_ntk->add_option("--trials", sim_trials);
    add_common(sim_ntk, opts);
    auto* sim_sigma = cmd_sim->add_subcommand("sigma-min", "one-layer smallest singular value");
    sim_sigma->add_option("--n", sim_n);
    sim_sigma->add_option("--m", sim_m);
    sim_sigma->add_option("--delta", sim_delta);
    sim_sigma->add_option("--trials", sim_trials);
    add_common(sim_sigma, opts);
    auto* sim_bn = cmd_sim->add_subcommand("bn-invariance", "batch/layer normalization invariance");
    sim_bn->add_option("--activation", sim_activation);
    sim_bn->add_option("--batch", sim_batch);
    sim_bn->add_option("--m", sim_m);
    add_common(sim_bn, opts);

    // train
    auto* cmd_train = app.add_subcommand("train", "optimization and interpolation");
    cmd_train->require_subcommand(1);
    double kappa = 0.0, eta = 0.0, eps = 1e-3;
    int steps = 2000, seeds = 20, train_n = 16, n_test = 2000;
    std::string depth_flag = "L1", labels = "linear", sizes = "64,128,256",
                train_activation = "relu-normalized", target = "linear";
    double train_delta = 0.1;
    auto* train_gd = cmd_train->add_subcommand("gd", "gradient descent rate check");
    train_gd->add_option("--kappa", kappa, "diagonal design condition number");
    train_gd->add_option("--n", train_n);
    train_gd->add_option("--delta", train_delta);
    train_gd->add_option("--activation", train_activation);
    train_gd->add_option("--depth", depth_flag, "layer count or L1");
    train_gd->add_option("--eta", eta, "step size (0: auto)");
    train_gd->add_option("--iterations", steps);
    add_common(train_gd, opts);
    auto* train_sgd = cmd_train->add_subcommand("sgd", "stochastic gradient descent");
    train_sgd->add_option("--kappa", kappa);
    train_sgd->add_option("--n", train_n);
    train_sgd->add_option("--delta", train_delta);
    train_sgd->add_option("--activation", train_activation);
    train_sgd->add_option("--depth", depth_flag);
    train_sgd->add_option("--epsilon", eps);
    train_sgd->add_option("--seeds", seeds);
    add_common(train_sgd, opts);
    auto* train_ip = cmd_train->add_subcommand("interpolate", "minimum-norm interpolator");
    train_ip->add_option("--n", train_n);
    train_ip->add_option("--delta", train_delta);
    train_ip->add_option("--activation", train_activation);
    train_ip->add_option("--depth", depth_flag);
    train_ip->add_option("--labels", labels)->check(CLI::IsMember({"zeros", "linear", "noise"}));
    add_common(train_ip, opts);
    auto* train_risk = cmd_train->add_subcommand("risk", "excess risk by sample size");
    train_risk->add_option("--n", sizes, "comma-separated training sizes");
    train_risk->add_option("--n-test", n_test);
    train_risk->add_option("--activation", train_activation);
    train_risk->add_option("--target", target)->check(CLI::IsMember({"zeros", "linear", "noise"}));
    add_common(train_risk, opts);

    // normrelu
    auto* cmd_nr = app.add_subcommand("normrelu", "NormReLU constants report");
    double c = dc::kNormReluDefaultC;
    cmd_nr->add_option("--c", c, "kink location")->required();
    add_common(cmd_nr, opts);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config_file(std::move(args));
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (opts.threads >= 1) dc::set_thread_budget(opts.threads);

    try {
        if (cmd_dual->parsed()) return run_dual_table(opts, activations, rho_points);
        if (cmd_profile->parsed()) {
            return run_profile(opts, kind, input, synthetic_n, delta, activation,
                               lmax);
        }
        if (sim_decay->parsed()) {
            return run_simulate_decay(opts, sim_activation, sim_m, sim_L, sim_rho,
                                      sim_trials);
        }
        if (sim_kernel->parsed()) {
            return run_simulate_kernel(opts, sim_activation, widths, sim_n, sim_L,
                                       sim_delta, sim_trials);
        }
        if (sim_ntk->parsed()) {
            return run_simulate_ntk(opts, sim_activation, sim_m, sim_n, sim_L,
                                    sim_delta, sim_trials);
        }
        if (sim_sigma->parsed()) {
            return run_simulate_sigma_min(opts, sim_n, sim_m, sim_delta, sim_trials);
        }
        if (sim_bn->parsed()) {
            return run_simulate_bn(opts, sim_activation, sim_batch, sim_m);
        }
        if (train_gd->parsed()) {
            return run_train_gd(opts, kappa, train_n, train_delta, train_activation,
                                depth_flag, eta, steps);
        }
        if (train_sgd->parsed()) {
            return run_train_sgd(opts, kappa, train_n, train_delta,
                                 train_activation, depth_flag, eps, seeds);
        }
        if (train_ip->parsed()) {
            return run_train_interpolate(opts, train_n, train_delta,
                                         train_activation, depth_flag, labels);
        }
        if (train_risk->parsed()) {
            return run_train_risk(opts, sizes, n_test, train_activation, target);
        }
        if (cmd_nr->parsed()) return run_normrelu(opts, c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        return fail_json("deepcond", e.what());
    }
    return 2;
}
