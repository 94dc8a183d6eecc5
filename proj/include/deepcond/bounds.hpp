#pragma once

namespace deepcond {

// Depth threshold L0 = max(ceil(log(1/(2 delta)) / log(1 + nu/2)), 0).
// nu in (0, 1], delta in (0, 1).
long depth_L0(double nu, double delta);

// Piecewise correlation envelope:
//   B_nu(L, delta) = 1 - delta (1 + nu/2)^L          for L <= L0
//                    (1/2) (1 - nu/2)^(L - L0)       for L >  L0
// L may be fractional (the NTK bounds use L/2).
double bound_B(double nu, double L, double delta);

struct BoundParams {
    double nu = 0.0;
    double delta = 0.0;
    long L0 = 0;
    long L1 = 0;  // depth from which kappa <= 1 + 2n (1-mu/2)^(L-L1)
    long L2 = 0;  // NTK analogue
};

// All three integer thresholds for the given non-linearity coefficient,
// separation delta, and input count n.
BoundParams depth_thresholds(double mu, double delta, int n);

}  // namespace deepcond
