#pragma once

#include "mlnk/grid.hpp"
#include "mlnk/nonlinearity.hpp"
#include "mlnk/semigroup.hpp"

#include <string>
#include <vector>

namespace mlnk {

// One instance of the competition between diffusion and forcing: dimension
// and diffusion order fix the decay rate beta = d/(2 sigma); the weighted
// nonlinearity h(t) f(u) feeds against it. epsilon scales the test level.
struct CriterionProblem {
    int d = 1;
    double sigma = 0.5;
    NonlinearitySpec f;
    TimeWeightSpec h;
    double epsilon = 1.0;

    void validate() const;
    double beta() const { return double(d) / (2.0 * sigma); }
};

enum class Verdict { Diverges, Converges, Undetermined };

const char* verdict_name(Verdict v);

// The discriminating integrand h(t) t^beta f(epsilon t^(-beta)); its
// integral over [1, inf) diverging or converging is the criterion.
double criterion_integrand(const CriterionProblem& p, double t);
double log_criterion_integrand(const CriterionProblem& p, double t);

struct CriterionVerdict {
    Verdict status = Verdict::Undetermined;
    double fitted_exponent = 0.0; // large-t power of the integrand (rho)
    double margin = 0.0;          // |rho + 1|, distance from the borderline
    bool exponential = false;     // panel sums accelerate geometrically
    int growth_sign = 0;          // +1 blowing up, -1 collapsing, 0 power-like
    bool saturated = false;       // partial sums overflowed double range
    std::vector<double> partial_sums; // cumulative integral at horizons 2^k
    std::string note;
};

// Quadrature-based classification on dyadic panels [2^k, 2^(k+1)],
// k < k_max. Panel sums are computed in log space so exponential weights
// cannot overflow the detector.
CriterionVerdict classify_numeric(const CriterionProblem& p, int k_max = 40,
                                  double margin_tol = 0.05, int order = 16);

// Exact classification from the family structure: the integrand behaves
// like t^rho with rho = growth(h) + beta (1 - smallest exponent of f), and
// diverges exactly when rho >= -1 (borderline included). Exponential
// weights are decided by the sign of their rate. Always determinate.
CriterionVerdict classify_analytic(const CriterionProblem& p);

struct ThresholdReport {
    std::string sweep_description; // which exponent was swept
    double closed_form = 0.0;      // 1 + 2 sigma (1 + growth) / d
    double bisection = 0.0;
    double gap = 0.0;
    bool has_bisection = false;
    std::string note;
};

// Critical exponent separating divergence from convergence when sweeping
// the designated exponent of f (p for power and log families, q for the
// power sum). The closed form is cross-checked by bisecting the fitted
// tail exponent of classify_numeric.
ThresholdReport fujita_threshold(const NonlinearitySpec& f, const TimeWeightSpec& h,
                                 int d, double sigma);

struct OrbitIntegralReport {
    double value = 0.0;          // integral over [0, t_max]
    double tail_estimate = 0.0;  // analytic continuation past t_max (may be inf)
    double total = 0.0;
    double fitted_decay_slope = 0.0; // free-slope check of the orbit decay
    double fit_residual = 0.0;
    double floor = 0.0;          // periodic equilibrium level subtracted in the fit
    Verdict verdict = Verdict::Undetermined;
    std::vector<DecayPoint> curve;
};

// Integral of h(t) f(N(t)) / N(t) along the actual semigroup orbit
// N(t) = sup |e^{-tA} u0|, the quantity whose finiteness certifies decay
// of the comparison argument. Runs the semigroup on a log-spaced grid up
// to t_max, closes [0, t_first] with the exact h integral, and continues
// the tail using the fitted self-similar decay of N.
OrbitIntegralReport orbit_criterion_integral(const GridField& u0,
                                             const CriterionProblem& p,
                                             double t_max, int times_per_decade);

// Cumulative criterion mass gamma(t) = 2^(-beta) eps * integral over [1,t]
// of h(s) s^beta f(eps s^(-beta)) ds; increasing in t.
double criterion_cumulative(const CriterionProblem& p, double t);

// First time tau with gamma(tau) equal to the minorant tail integral at
// the given start level. Finite exactly when the criterion diverges;
// returns +inf when the analytic classification says converges.
double blowup_time_upper_bound(const CriterionProblem& p, double start_level);

} // namespace mlnk
