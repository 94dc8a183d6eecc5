#pragma once

#include <functional>
#include <string>
#include <vector>

namespace deepcond {

// A scalar activation plus the constants that define its normalized form
// sigma(u) = (raw(u) - centering) / scale. Closed-form duals, analytic
// derivatives, and kink locations are attached where known; everything else
// falls back to quadrature or central differences.
struct ActivationSpec {
    std::string name;
    std::function<double(double)> raw;
    double centering = 0.0;
    double scale = 1.0;
    bool normalized = false;         // E[sigma] = 0 and E[sigma^2] = 1
    bool square_normalized = false;  // E[sigma^2] = 1 (mean may be nonzero)
    std::function<double(double)> raw_derivative;
    std::function<double(double)> closed_form_dual;
    std::function<double(double)> closed_form_dual_derivative;
    std::vector<double> kinks;  // non-smooth points of raw, in input space

    double operator()(double u) const { return (raw(u) - centering) / scale; }
    // Derivative of the normalized form; central difference (h = 1e-5) when
    // no analytic derivative is registered.
    double derivative(double u) const;
};

// Built-in registry. Throws std::invalid_argument listing the known names
// when the lookup fails.
const ActivationSpec& get_activation(const std::string& name);
std::vector<std::string> activation_names();
// Names of the normalized entries (mean zero, unit second moment).
std::vector<std::string> normalized_activation_names();

// NormReLU with kink location c: lambda(c) * (max(u - c, 0) + b(c)).
ActivationSpec make_normrelu(double c);

inline constexpr double kNormReluDefaultC = -1.5975;

}  // namespace deepcond
