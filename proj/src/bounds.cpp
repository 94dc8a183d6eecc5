#include "deepcond/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace deepcond {

namespace {

void check_params(double nu, double delta) {
    if (!(nu > 0.0) || nu > 1.0) {
        throw std::domain_error("bounds: nu must be in (0, 1]");
    }
    if (!(delta > 0.0) || !(delta < 1.0)) {
        throw std::domain_error("bounds: delta must be in (0, 1)");
    }
}

// ceil with a guard against values that are integers up to rounding fuzz.
long ceil_int(double v) {
    double r = std::ceil(v - 1e-9);
    return static_cast<long>(r);
}

}  // namespace

long depth_L0(double nu, double delta) {
    check_params(nu, delta);
    double v = std::log(1.0 / (2.0 * delta)) / std::log1p(nu / 2.0);
    long L0 = ceil_int(v);
    return L0 > 0 ? L0 : 0;
}

double bound_B(double nu, double L, double delta) {
    check_params(nu, delta);
    if (L < 0.0) throw std::domain_error("bounds: depth must be >= 0");
    const long L0 = depth_L0(nu, delta);
    if (L <= static_cast<double>(L0)) {
        return 1.0 - delta * std::pow(1.0 + nu / 2.0, L);
    }
    return 0.5 * std::pow(1.0 - nu / 2.0, L - static_cast<double>(L0));
}

BoundParams depth_thresholds(double mu, double delta, int n) {
    check_params(mu, delta);
    if (n < 1) throw std::domain_error("bounds: n must be >= 1");
    BoundParams p;
    p.nu = mu;
    p.delta = delta;
    p.L0 = depth_L0(mu, delta);
    const double rate = -std::log1p(-mu / 2.0);
    p.L1 = ceil_int(std::log(static_cast<double>(n)) / rate) + p.L0;
    p.L2 = ceil_int(2.0 * std::log(2.0 * n) / rate) + 2 * p.L0;
    return p;
}

}  // namespace deepcond
