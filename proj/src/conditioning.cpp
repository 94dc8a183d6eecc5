#include "deepcond/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deepcond/kernels.hpp"
#include "deepcond/linalg.hpp"
#include "deepcond/parallel.hpp"

namespace deepcond {

namespace {

constexpr double kEntrySlack = 1e-9;

double clamp_composed(double v) {
    if (std::abs(v) > 1.0 + kEntrySlack) {
        throw std::runtime_error(
            "propagate: composed entry left [-1, 1] by more than 1e-9 (got " +
            std::to_string(v) + ")");
    }
    return std::clamp(v, -1.0, 1.0);
}

// Separation of a unit-diagonal Gram; throws when a pair coincides.
double separation_delta(const GramMatrix& k) {
    double max_off = 0.0;
    int bad_i = -1, bad_j = -1;
    for (int i = 0; i < k.size(); ++i) {
        for (int j = i + 1; j < k.size(); ++j) {
            double v = std::abs(k.at(i, j));
            if (v > max_off) {
                max_off = v;
                bad_i = i;
                bad_j = j;
            }
        }
    }
    if (max_off >= 1.0 - 1e-15) {
        throw std::domain_error("inputs " + std::to_string(bad_i) + " and " +
                                std::to_string(bad_j) +
                                " are coincident (|rho| = 1): delta <= 0");
    }
    // Orthogonal inputs saturate the separation; keep delta inside (0, 1).
    return std::min(1.0 - max_off, 1.0 - 1e-12);
}

}  // namespace

SpectrumSummary spectrum(const GramMatrix& k) {
    if (k.size() > 4096) {
        throw std::domain_error("spectrum: n must be <= 4096");
    }
    k.validate();
    SymmetricEigen se = symmetric_eigenvalues(k.entries(), k.size());
    SpectrumSummary out;
    out.eigenvalues = se.values;
    out.lambda_min = se.values.front();
    out.lambda_max = se.values.back();
    out.degenerate = !(out.lambda_min > 0.0);
    if (!out.degenerate) out.kappa = out.lambda_max / out.lambda_min;
    return out;
}

GramMatrix apply_dual(const GramMatrix& k, const DualActivation& d) {
    GramMatrix out = k;
    map_entries(k.entries(), out.entries(),
                [&d](double v) { return clamp_composed(d.eval(clamp_composed(v))); });
    return out;
}

GramMatrix propagate_kernel(const GramMatrix& k, const DualActivation& d, int L) {
    if (!k.unit_diagonal()) {
        throw std::domain_error(
            "propagate_kernel: input Gram must have unit diagonal "
            "(use general_norm_propagate for non-unit norms)");
    }
    if (L < 0) throw std::domain_error("propagate_kernel: depth must be >= 0");
    k.validate();
    GramMatrix cur = k;
    for (int l = 0; l < L; ++l) cur = apply_dual(cur, d);
    return cur;
}

double ntk_entry(const DualActivation& d, double rho, int L) {
    std::vector<double> composed(L + 1);
    composed[0] = clamp_composed(rho);
    for (int h = 1; h <= L; ++h) {
        composed[h] = clamp_composed(d.eval(composed[h - 1]));
    }
    // Term h (the gradient through layer h's weights) carries the layer-(h-1)
    // representation correlation times one derivative-dual factor per layer
    // above it, each evaluated at that layer's input correlation.
    double sum = 0.0, prod = 1.0;
    for (int h = L + 1; h >= 1; --h) {
        sum += composed[h - 1] * prod;
        if (h >= 2) prod *= d.derivative(composed[h - 2]);
    }
    return sum;
}

double ntk_diagonal(const DualActivation& d, int L) {
    const double s = d.derivative_at_one();
    if (std::abs(s - 1.0) < 1e-12) return L + 1.0;  // removable singularity
    return (std::pow(s, L + 1) - 1.0) / (s - 1.0);
}

GramMatrix ntk_matrix(const GramMatrix& k, const DualActivation& d, int L) {
    if (!k.unit_diagonal()) {
        throw std::domain_error("ntk_matrix: input Gram must have unit diagonal");
    }
    if (L < 0) throw std::domain_error("ntk_matrix: depth must be >= 0");
    k.validate();
    GramMatrix out(k.size(), false);
    const int n = k.size();
    parallel_for(static_cast<std::size_t>(n) * n, [&](std::size_t idx) {
        int i = static_cast<int>(idx / n);
        int j = static_cast<int>(idx % n);
        if (j < i) return;
        double v = ntk_entry(d, k.at(i, j), L);
        out.entries()[static_cast<std::size_t>(i) * n + j] = v;
        out.entries()[static_cast<std::size_t>(j) * n + i] = v;
    });
    return out;
}

DepthProfile verify_top_layer(const GramMatrix& k, const DualActivation& d,
                              int l_max) {
    if (!k.unit_diagonal()) {
        throw std::domain_error("verify_top_layer: unit-diagonal Gram required");
    }
    k.validate();
    DepthProfile profile;
    const int n = k.size();
    profile.mu = d.mu();
    profile.mu_zero = d.linear();
    profile.delta_sep = n > 1 ? separation_delta(k) : 1.0 - 1e-12;
    profile.delta_ns = spectrum(k).lambda_min;
    const bool check = !profile.mu_zero && n > 1;
    if (check) {
        profile.thresholds = depth_thresholds(profile.mu, profile.delta_sep, n);
    }

    profile.per_depth.assign(l_max + 1, DepthRecord{});
    std::vector<std::string> viols(l_max + 1);
    // Depths are independent work units; each recomputes its composition so
    // the result does not depend on the schedule.
    parallel_for(static_cast<std::size_t>(l_max) + 1, [&](std::size_t li) {
        const int L = static_cast<int>(li);
        GramMatrix kl = propagate_kernel(k, d, L);
        SpectrumSummary sp = spectrum(kl);
        DepthRecord rec;
        rec.depth = L;
        rec.max_off_diag = n > 1 ? kl.max_abs_off_diagonal() : 0.0;
        rec.lambda_min = sp.lambda_min;
        rec.lambda_max = sp.lambda_max;
        rec.kappa = sp.degenerate ? std::numeric_limits<double>::infinity()
                                  : sp.kappa;
        std::string bad;
        if (check) {
            rec.bound_b = bound_B(profile.mu, L, profile.delta_sep);
            if (rec.max_off_diag > rec.bound_b + 1e-9) {
                bad += "off-diagonal bound violated at L=" + std::to_string(L) + "; ";
            }
            if (profile.delta_ns > 0.0) {
                double lb = 1.0 - bound_B(profile.mu, L, profile.delta_ns);
                if (rec.lambda_min < lb - 1e-9) {
                    bad += "lambda_min bound violated at L=" + std::to_string(L) + "; ";
                }
                rec.bound_kappa = 1.0 + n / profile.delta_ns *
                                            std::pow(1.0 + profile.mu / 2.0, -L);
                if (rec.kappa > rec.bound_kappa + 1e-9) {
                    bad += "kappa bound (non-singularity) violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
            if (L >= profile.thresholds.L1) {
                double bk = 1.0 + 2.0 * n *
                                      std::pow(1.0 - profile.mu / 2.0,
                                               L - profile.thresholds.L1);
                if (!(rec.bound_kappa == rec.bound_kappa) || bk < rec.bound_kappa) {
                    rec.bound_kappa = bk;
                }
                if (rec.kappa > bk + 1e-9) {
                    bad += "kappa bound (separation) violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
        }
        profile.per_depth[li] = rec;
        viols[li] = bad;
    });
    for (auto& v : viols) {
        if (!v.empty()) profile.violations.push_back(std::move(v));
    }
    return profile;
}

DepthProfile verify_ntk(const GramMatrix& k, const DualActivation& d, int l_max) {
    if (!k.unit_diagonal()) {
        throw std::domain_error("verify_ntk: unit-diagonal Gram required");
    }
    k.validate();
    DepthProfile profile;
    const int n = k.size();
    profile.mu = d.mu();
    profile.mu_zero = d.linear();
    profile.delta_sep = n > 1 ? separation_delta(k) : 1.0 - 1e-12;
    profile.delta_ns = spectrum(k).lambda_min;
    const bool check = !profile.mu_zero && n > 1;
    if (check) {
        profile.thresholds = depth_thresholds(profile.mu, profile.delta_sep, n);
    }
    const long l0_sep = check ? depth_L0(profile.mu, profile.delta_sep) : 0;
    const long l0_ns = (check && profile.delta_ns > 0.0)
                           ? depth_L0(profile.mu, profile.delta_ns)
                           : 0;

    profile.per_depth.assign(l_max + 1, DepthRecord{});
    std::vector<std::string> viols(l_max + 1);
    parallel_for(static_cast<std::size_t>(l_max) + 1, [&](std::size_t li) {
        const int L = static_cast<int>(li);
        GramMatrix ntk = ntk_matrix(k, d, L);
        // All diagonal entries are equal; normalize by it.
        double diag = ntk.at(0, 0);
        double diag_spread = 0.0;
        for (int i = 0; i < n; ++i) {
            diag_spread = std::max(diag_spread, std::abs(ntk.at(i, i) - diag));
        }
        GramMatrix normalized(n, true);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                normalized.at(i, j) = i == j ? 1.0 : ntk.at(i, j) / diag;
            }
        }
        SpectrumSummary sp = spectrum(normalized);
        DepthRecord rec;
        rec.depth = L;
        rec.max_off_diag = n > 1 ? normalized.max_abs_off_diagonal() : 0.0;
        rec.lambda_min = sp.lambda_min;
        rec.lambda_max = sp.lambda_max;
        rec.kappa = sp.degenerate ? std::numeric_limits<double>::infinity()
                                  : sp.kappa;
        std::string bad;
        if (diag_spread > 1e-10 * std::abs(diag)) {
            bad += "NTK diagonal not constant at L=" + std::to_string(L) + "; ";
        }
        if (check) {
            if (L >= 2 * l0_sep) {
                rec.bound_b = 2.0 * bound_B(profile.mu, L / 2.0, profile.delta_sep);
                if (rec.max_off_diag > rec.bound_b + 1e-9) {
                    bad += "NTK off-diagonal bound violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
            if (profile.delta_ns > 0.0 && L >= 2 * l0_ns) {
                double lb = 1.0 - 2.0 * bound_B(profile.mu, L / 2.0, profile.delta_ns);
                if (rec.lambda_min < lb - 1e-9) {
                    bad += "NTK lambda_min bound violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
            if (profile.delta_ns > 0.0 && L >= 4 * l0_ns) {
                rec.bound_kappa =
                    1.0 + 2.0 * n / profile.delta_ns *
                              std::pow(1.0 + profile.mu / 2.0, -L / 2.0);
                if (rec.kappa > rec.bound_kappa + 1e-9) {
                    bad += "NTK kappa bound (non-singularity) violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
            if (L >= profile.thresholds.L2) {
                double bk = 1.0 + 4.0 * n *
                                      std::pow(1.0 - profile.mu / 2.0,
                                               L / 2.0 - profile.thresholds.L2);
                if (!(rec.bound_kappa == rec.bound_kappa) || bk < rec.bound_kappa) {
                    rec.bound_kappa = bk;
                }
                if (rec.kappa > bk + 1e-9) {
                    bad += "NTK kappa bound (separation) violated at L=" +
                           std::to_string(L) + "; ";
                }
            }
        }
        profile.per_depth[li] = rec;
        viols[li] = bad;
    });
    for (auto& v : viols) {
        if (!v.empty()) profile.violations.push_back(std::move(v));
    }
    return profile;
}

EigenLbResult eigen_lb_check(const std::function<double(double)>& f,
                             const GramMatrix& k, double delta) {
    if (!k.unit_diagonal()) {
        throw std::domain_error("eigen_lb_check: unit-diagonal Gram required");
    }
    if (!(delta > 0.0)) {
        throw std::domain_error("eigen_lb_check: delta must be positive");
    }
    k.validate();
    SpectrumSummary in_sp = spectrum(k);
    if (in_sp.lambda_min < delta - 1e-12) {
        throw std::domain_error("eigen_lb_check: lambda_min(K) < delta");
    }
    GramMatrix mapped(k.size(), false);
    for (int i = 0; i < k.size(); ++i) {
        for (int j = 0; j < k.size(); ++j) {
            mapped.at(i, j) = f(k.at(i, j));
        }
    }
    EigenLbResult out;
    out.lhs_min = spectrum(mapped).lambda_min;
    out.rhs_bound = f(1.0) - f(1.0 - delta);
    if (out.lhs_min < out.rhs_bound - 1e-9) {
        throw std::runtime_error(
            "eigen_lb_check: lambda_min(f[K]) fell below f(1) - f(1-delta)");
    }
    return out;
}

GeneralNormTrace general_norm_propagate(double gamma_x, double gamma_y,
                                        double rho, const ActivationSpec& spec,
                                        int layers) {
    if (gamma_x < 0.5 || gamma_y < 0.5) {
        throw std::domain_error("general_norm_propagate: squared norms must be >= 0.5");
    }
    if (std::abs(rho) >= 1.0) {
        throw std::domain_error("general_norm_propagate: need |rho| < 1");
    }
    if (layers < 0) throw std::domain_error("general_norm_propagate: layers >= 0");

    NormTransferMap transfer(spec);
    DualActivation d = DualActivation::from_activation(spec);

    GeneralNormTrace out;
    out.hypothesis_warning = !transfer.hypothesis_ok();
    out.alpha = transfer.alpha();
    out.mu = d.mu();
    const double delta = std::min(1.0 - std::abs(rho), 1.0 - 1e-12);
    const double spread = std::max({std::abs(gamma_x - 1.0),
                                    std::abs(gamma_y - 1.0), out.mu / 4.0});
    out.l_hat = out.alpha > 0.0
                    ? std::log(4.0 * spread / out.mu) / out.alpha
                    : std::numeric_limits<double>::infinity();
    if (out.l_hat < 0.0) out.l_hat = 0.0;

    out.steps.push_back({gamma_x, gamma_y, rho});
    out.rho_bound.assign(layers + 1, std::numeric_limits<double>::infinity());
    double gx = gamma_x, gy = gamma_y, r = rho;
    for (int l = 1; l <= layers; ++l) {
        double cross = dot_product_map(spec, gx, gy, r);
        double nx = transfer.eval(gx);
        double ny = transfer.eval(gy);
        r = cross / std::sqrt(nx * ny);
        r = std::clamp(r, -1.0, 1.0);
        gx = nx;
        gy = ny;
        out.steps.push_back({gx, gy, r});
        if (out.mu > 0.0 && l >= out.l_hat) {
            out.rho_bound[l] = bound_B(out.mu / 2.0, l - out.l_hat, delta);
        }
    }
    return out;
}

UncenteredTrace uncentered_convergence(const DualActivation& d, double rho0,
                                       int layers, double eps) {
    if (d.affine()) {
        throw std::domain_error("uncentered_convergence: activation is affine");
    }
    if (std::abs(d.second_moment() - 1.0) > 1e-6) {
        throw std::domain_error(
            "uncentered_convergence: activation must be square-normalized");
    }
    if (std::abs(rho0) > 1.0) {
        throw std::domain_error("uncentered_convergence: |rho0| <= 1 required");
    }
    UncenteredTrace out;
    out.trace.resize(layers + 1);
    out.trace[0] = rho0;
    for (int l = 1; l <= layers; ++l) {
        out.trace[l] = clamp_composed(d.eval(out.trace[l - 1]));
    }

    const double mu_tilde = d.mu_tilde();
    const double sigma0 = d.eval(0.0);
    const double delta = std::max(1.0 - std::abs(rho0), 1e-12);

    if (sigma0 <= 1e-12) {
        // Centered case: rho_bar = 0 and the centered envelope applies.
        out.rho_bar = 0.0;
        out.l0 = 0;
        out.rate_bound.resize(layers + 1);
        for (int l = 0; l <= layers; ++l) {
            out.rate_bound[l] = bound_B(d.mu(), l, std::min(delta, 1.0 - 1e-12));
        }
        return out;
    }

    FixedPointResult fp = fixed_point(d);
    out.rho_bar = fp.rho_bar;
    const double deriv = fp.derivative_at_fixed_point;

    if (out.rho_bar >= 1.0 - 1e-12 && std::abs(deriv - 1.0) <= 1e-9) {
        // Boundary case: iterates rise to 1; report the layer count to reach
        // 1 - eps against the O(log(1/eps)/eps) bound.
        out.boundary_case = true;
        out.eps = eps;
        long l_eps = std::lround(std::ceil(std::log(2.0 / eps) /
                                           -std::log1p(-eps * mu_tilde / 2.0)));
        long l_escape = std::lround(std::ceil(1.0 / sigma0));
        out.layers_bound = static_cast<double>(std::max(l_eps, l_escape));
        for (int l = 0; l <= layers; ++l) {
            if (out.trace[l] >= 1.0 - eps) {
                out.layers_to_eps = l;
                break;
            }
        }
        out.rate_bound.assign(layers + 1,
                              std::numeric_limits<double>::infinity());
        return out;
    }

    const double shrink = 1.0 + mu_tilde * (1.0 - out.rho_bar) / 2.0;
    double l_head = std::log((1.0 - out.rho_bar) / (2.0 * delta)) /
                    std::log(shrink);
    long l0 = std::max<long>({std::lround(std::ceil(l_head - 1e-9)),
                              std::lround(std::ceil(1.0 / sigma0 - 1e-9)), 0});
    out.l0 = l0;
    const double rate =
        std::max(1.0 - mu_tilde * (1.0 - out.rho_bar) / 2.0, deriv);
    out.rate_bound.assign(layers + 1, std::numeric_limits<double>::infinity());
    for (int l = 0; l <= layers; ++l) {
        if (l >= l0) {
            out.rate_bound[l] =
                std::pow(rate, l - l0) * (1.0 + out.rho_bar) / 2.0;
        }
    }
    return out;
}

NormReluBoundResult normrelu_correlation_bound(double gamma_x, double gamma_y,
                                               double rho, int layers,
                                               double eps, double c) {
    if (gamma_x < 0.5 || gamma_x > 2.0 || gamma_y < 0.5 || gamma_y > 2.0) {
        throw std::domain_error(
            "normrelu_correlation_bound: squared norms must lie in [0.5, 2]");
    }
    if (!(eps > 0.0)) {
        throw std::domain_error("normrelu_correlation_bound: eps must be > 0");
    }
    NormReluBoundResult out;
    const double alpha_minus = 2.0 * normrelu_norm_transfer(0.5, c) - 1.0;
    const double alpha_plus = 1.0 - normrelu_norm_transfer_derivative(1.0, c);
    out.alpha_prime = std::min(alpha_minus, alpha_plus);
    out.delta_prime = std::max(normrelu_bias(0.5, c) / alpha_minus,
                               normrelu_bias(2.0, c) / alpha_plus);
    const double mu = normrelu_constants(c).mu;
    const double delta = 1.0 - std::abs(rho);
    if (delta <= out.delta_prime) {
        throw std::domain_error(
            "normrelu_correlation_bound: requires 1 - |rho| > delta'");
    }
    out.l_hat = 2.0 / out.alpha_prime *
                std::log(3.0 / std::min(eps, mu / 4.0));
    if (layers < out.l_hat) {
        throw std::domain_error(
            "normrelu_correlation_bound: depth below the guarantee threshold L_hat = " +
            std::to_string(out.l_hat));
    }

    ActivationSpec spec = make_normrelu(c);
    GeneralNormTrace trace =
        general_norm_propagate(gamma_x, gamma_y, rho, spec, layers);
    out.rho_trace.reserve(trace.steps.size());
    for (const auto& s : trace.steps) out.rho_trace.push_back(s.rho);
    out.measured_rho = out.rho_trace.back();
    out.bound = bound_B(mu / 2.0, layers - out.l_hat, delta - out.delta_prime) +
                out.delta_prime * eps;
    if (std::abs(out.measured_rho) > out.bound + 1e-9) {
        throw std::runtime_error(
            "normrelu_correlation_bound: measured correlation exceeds the bound");
    }
    return out;
}

}  // namespace deepcond
