#pragma once

#include "mlnk/grid.hpp"
#include "mlnk/quadrature.hpp"

#include <vector>

namespace mlnk {

// e^{-t (mixed operator)} applied to a field by Fourier multiplier.
GridField apply_semigroup(const GridField& u, double sigma, double t);

struct DecayPoint {
    double t = 0.0;
    double sup = 0.0;
    double mass = 0.0;
};

// Sup norm (and mass) of the evolved field at the given times. The input
// must be nonnegative (tiny undershoots tolerated) and not identically
// zero; times must be positive and strictly increasing, and the box must
// contain the diffusion up to the last time.
std::vector<DecayPoint> supnorm_decay_curve(const GridField& u0, double sigma,
                                            const std::vector<double>& times);

// OLS fit of log sup against log t over [t_lo, t_hi]. Needs at least five
// curve points inside the window.
quad::LinearFit fit_decay_exponent(const std::vector<DecayPoint>& curve,
                                   double t_lo, double t_hi);

} // namespace mlnk
