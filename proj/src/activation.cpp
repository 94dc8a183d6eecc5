#include "deepcond/activation.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "deepcond/dual.hpp"
#include "deepcond/hermite.hpp"

namespace deepcond {

namespace {

double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double relu_raw_dual(double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    return (std::sqrt(1.0 - rho * rho) + (M_PI - std::acos(rho)) * rho) /
           (2.0 * M_PI);
}

double relu_raw_dual_derivative(double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    return (M_PI - std::acos(rho)) / (2.0 * M_PI);
}

double step_raw_dual(double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    return (M_PI - std::acos(rho)) / (2.0 * M_PI);
}

std::map<std::string, ActivationSpec> build_registry() {
    std::map<std::string, ActivationSpec> reg;

    {
        ActivationSpec a;
        a.name = "identity";
        a.raw = [](double u) { return u; };
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double) { return 1.0; };
        a.closed_form_dual = [](double rho) { return rho; };
        a.closed_form_dual_derivative = [](double) { return 1.0; };
        reg[a.name] = a;
    }
    {
        ActivationSpec a;
        a.name = "relu";
        a.raw = [](double u) { return std::max(u, 0.0); };
        a.raw_derivative = [](double u) { return u > 0.0 ? 1.0 : 0.0; };
        a.closed_form_dual = relu_raw_dual;
        a.closed_form_dual_derivative = relu_raw_dual_derivative;
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    {
        // (relu - phi(0)) / sqrt(1/2 - 1/(2 pi))
        ActivationSpec a;
        a.name = "relu-normalized";
        a.raw = [](double u) { return std::max(u, 0.0); };
        a.centering = gaussian_pdf(0.0);
        const double var = 0.5 - 1.0 / (2.0 * M_PI);
        a.scale = std::sqrt(var);
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double u) { return u > 0.0 ? 1.0 : 0.0; };
        const double c0sq = gaussian_pdf(0.0) * gaussian_pdf(0.0);
        a.closed_form_dual = [var, c0sq](double rho) {
            return (relu_raw_dual(rho) - c0sq) / var;
        };
        a.closed_form_dual_derivative = [var](double rho) {
            return relu_raw_dual_derivative(rho) / var;
        };
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    {
        ActivationSpec a;
        a.name = "step";
        a.raw = [](double u) { return u >= 0.0 ? 1.0 : 0.0; };
        a.raw_derivative = [](double) { return 0.0; };
        a.closed_form_dual = step_raw_dual;
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    {
        // sqrt(2) * 1[u >= 0]: unit second moment, nonzero mean
        ActivationSpec a;
        a.name = "step-square-normalized";
        a.raw = [](double u) { return u >= 0.0 ? 1.0 : 0.0; };
        a.scale = 1.0 / std::sqrt(2.0);
        a.square_normalized = true;
        a.raw_derivative = [](double) { return 0.0; };
        a.closed_form_dual = [](double rho) { return 2.0 * step_raw_dual(rho); };
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    {
        // the sign activation
        ActivationSpec a;
        a.name = "step-normalized";
        a.raw = [](double u) { return u >= 0.0 ? 1.0 : 0.0; };
        a.centering = 0.5;
        a.scale = 0.5;
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double) { return 0.0; };
        a.closed_form_dual = [](double rho) {
            return (2.0 / M_PI) * std::asin(std::clamp(rho, -1.0, 1.0));
        };
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    {
        // Dual computed directly: E[e^X e^X'] = exp((Var(X)+Var(X'))/2 + rho)
        // = e^{1+rho}. Rescaling the dual by a constant cancels in mu, the
        // quantity asserted for this activation.
        ActivationSpec a;
        a.name = "exp";
        a.raw = [](double u) { return std::exp(u); };
        a.raw_derivative = [](double u) { return std::exp(u); };
        a.closed_form_dual = [](double rho) { return std::exp(1.0 + rho); };
        a.closed_form_dual_derivative = [](double rho) { return std::exp(1.0 + rho); };
        reg[a.name] = a;
    }
    {
        ActivationSpec a;
        a.name = "exp-normalized";
        a.raw = [](double u) { return std::exp(u); };
        a.centering = std::exp(0.5);
        const double var = std::exp(2.0) - std::exp(1.0);
        a.scale = std::sqrt(var);
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double u) { return std::exp(u); };
        a.closed_form_dual = [var](double rho) {
            return (std::exp(1.0 + rho) - std::exp(1.0)) / var;
        };
        a.closed_form_dual_derivative = [var](double rho) {
            return std::exp(1.0 + rho) / var;
        };
        reg[a.name] = a;
    }
    {
        ActivationSpec a;
        a.name = "tanh-normalized";
        a.raw = [](double u) { return std::tanh(u); };
        QuadratureRule rule = gaussian_panel_rule({});
        double m2 = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            double t = std::tanh(rule.nodes[i]);
            m2 += rule.weights[i] * t * t;
        }
        a.scale = std::sqrt(m2);
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double u) {
            double t = std::tanh(u);
            return 1.0 - t * t;
        };
        reg[a.name] = a;
    }
    {
        ActivationSpec a;
        a.name = "hermite2";
        a.raw = [](double u) { return (u * u - 1.0) / std::sqrt(2.0); };
        a.normalized = a.square_normalized = true;
        a.raw_derivative = [](double u) { return std::sqrt(2.0) * u; };
        a.closed_form_dual = [](double rho) { return rho * rho; };
        a.closed_form_dual_derivative = [](double rho) { return 2.0 * rho; };
        reg[a.name] = a;
    }
    reg["normrelu"] = make_normrelu(kNormReluDefaultC);
    {
        // SeLU, for comparison runs only; not normalized.
        ActivationSpec a;
        a.name = "selu";
        const double alpha = 1.6732632423543772;
        const double sc = 1.0507009873554805;
        a.raw = [alpha, sc](double u) {
            return u > 0.0 ? sc * u : sc * alpha * (std::exp(u) - 1.0);
        };
        a.raw_derivative = [alpha, sc](double u) {
            return u > 0.0 ? sc : sc * alpha * std::exp(u);
        };
        a.kinks = {0.0};
        reg[a.name] = a;
    }
    return reg;
}

const std::map<std::string, ActivationSpec>& registry() {
    static const std::map<std::string, ActivationSpec> reg = build_registry();
    return reg;
}

}  // namespace

double ActivationSpec::derivative(double u) const {
    if (raw_derivative) return raw_derivative(u) / scale;
    const double h = 1e-5;
    return (raw(u + h) - raw(u - h)) / (2.0 * h * scale);
}

const ActivationSpec& get_activation(const std::string& name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) {
        std::ostringstream msg;
        msg << "unknown activation '" << name << "'; known:";
        for (const auto& [k, v] : reg) msg << ' ' << k;
        throw std::invalid_argument(msg.str());
    }
    return it->second;
}

std::vector<std::string> activation_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

std::vector<std::string> normalized_activation_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) {
        if (v.normalized) names.push_back(k);
    }
    return names;
}

ActivationSpec make_normrelu(double c) {
    NormReluConstants k = normrelu_constants(c);
    ActivationSpec a;
    a.name = "normrelu";
    a.raw = [c, b = k.b](double u) { return std::max(u - c, 0.0) + b; };
    a.scale = 1.0 / k.lambda;
    a.normalized = a.square_normalized = true;
    a.raw_derivative = [c](double u) { return u > c ? 1.0 : 0.0; };
    a.kinks = {c};
    return a;
}

}  // namespace deepcond
