#pragma once

#include "mlnk/grid.hpp"
#include "mlnk/spectral.hpp"

#include <vector>

namespace mlnk {

struct KernelSample {
    GridSpec grid;
    double sigma = 0.5;
    double t = 1.0;
    GridField values;
};

// Resolution gates for synthesizing the heat kernel of the mixed operator
// on a periodic box. The spectral check demands that the multiplier has
// decayed below 1e-14 at the Nyquist frequency; the containment check
// demands exp(-L^2/(4t)) < 1e-12 so the Gaussian factor cannot wrap.
// Violations raise ResolutionError with a concrete n or L suggestion.
void require_spectral_resolution(const GridSpec& grid, double sigma, double t);
void require_containment(const GridSpec& grid, double t);

// Heat kernel p_t synthesized directly from exp(-t * m(xi)).
KernelSample kernel_from_symbol(const GridSpec& grid, double sigma, double t);

// Same kernel assembled as (Gaussian at time t) convolved with the kernel
// of the fractional part alone, using the periodic convolution theorem.
KernelSample kernel_convolution_form(const GridSpec& grid, double sigma, double t);

struct KernelCheck {
    double mass_error = 0.0;     // |cell sum - 1|
    double min_value = 0.0;
    double symmetry_error = 0.0; // max |p(x) - p(-x)|
    double boundary_value = 0.0; // kernel at the far corner of the box
    double max_value = 0.0;
    bool mass_ok = false;
    bool positivity_ok = false;
    bool symmetry_ok = false;
    bool ok() const { return mass_ok && positivity_ok && symmetry_ok; }
};

// Density sanity of a synthesized kernel: unit mass, positivity up to a
// small undershoot floor, even symmetry.
KernelCheck verify_density_properties(const KernelSample& k,
                                      double mass_tol = 1e-6,
                                      double positivity_floor = -1e-9,
                                      double symmetry_tol = 1e-12);

// Max pointwise deviation of p_t * p_s (periodic convolution) from p_{t+s}.
double verify_semigroup_property(const GridSpec& grid, double sigma, double t, double s);

struct ScalingBoundsReport {
    std::vector<double> times;
    std::vector<double> scaled_sup; // t^beta * sup p_t
    double cstar = 0.0;             // max of scaled_sup
    double beta = 0.0;
    bool upper_ok = false;          // spread of scaled sup within one decade
    bool lower_ok = false;          // no collapse below 1e-3 of the max (t > 1)
};

// Checks the self-similar sup-norm law sup p_t ~ t^(-beta), beta = d/(2 sigma),
// across the given times. Throws CoverageError when sqrt(t) exceeds L.
ScalingBoundsReport verify_bounds(const GridSpec& grid, double sigma,
                                  const std::vector<double>& t_list);

} // namespace mlnk
