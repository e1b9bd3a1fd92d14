#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace mlnk {

// Spatial nonlinearity u -> f(u), u >= 0. Built-in families plus a sampled
// table. All built-ins are convex, increasing, f(0) = 0.
enum class FFamily { Power, PowerSum, LogPower, CustomTable };

struct NonlinearitySpec {
    FFamily family = FFamily::Power;
    double p = 2.0;
    double q = 0.0; // PowerSum only, 1 < q <= p
    std::vector<std::pair<double, double>> table; // CustomTable (u, f(u))
    bool diagnostic = false; // lifts the p > 1 restriction for probe runs

    static NonlinearitySpec power(double p, bool diagnostic = false);
    static NonlinearitySpec power_sum(double p, double q);
    static NonlinearitySpec log_power(double p);
    static NonlinearitySpec custom_table(std::vector<std::pair<double, double>> t);

    void validate() const;
    std::string describe() const;
};

// Time weight t -> h(t), h >= 0 on t > 0.
enum class HFamily { Constant, PowerT, PowerSumT, ExpT };

struct TimeWeightSpec {
    HFamily family = HFamily::Constant;
    double c = 1.0;     // Constant level, c >= 0
    double r = 0.0;     // PowerT exponent; PowerSumT larger exponent
    double s = 0.0;     // PowerSumT smaller exponent, s <= r
    double theta = 0.0; // ExpT rate

    static TimeWeightSpec constant(double c);
    static TimeWeightSpec power_t(double r);
    static TimeWeightSpec power_sum_t(double r, double s);
    static TimeWeightSpec exp_t(double theta);

    void validate() const;
    std::string describe() const;
    // Effective power-law growth exponent of h at large t. Throws for ExpT.
    double growth_exponent() const;
};

double eval_f(const NonlinearitySpec& f, double u);
double eval_h(const TimeWeightSpec& h, double t);

// log f(e^{log_u}) and log h(t), evaluated without intermediate
// over/underflow for the built-in families.
double log_eval_f(const NonlinearitySpec& f, double log_u);
double log_eval_h(const TimeWeightSpec& h, double t);

// Scaling envelopes: f_m(u) = inf over 0<a<1 of f(a u)/f(a), and f_M the
// matching sup. Numeric versions scan a geometric grid in a, refine the
// active extremum by golden section, and extrapolate toward the a -> 0
// endpoint. Closed-form versions return the standard formulas for the
// built-in families; for LogPower the stated max formula equals the true
// supremum only when p >= 2 (below that the ratio peaks at an interior a).
double minorant_numeric(const NonlinearitySpec& f, double u, int alpha_grid_size = 256);
double majorant_numeric(const NonlinearitySpec& f, double u, int alpha_grid_size = 256);
double minorant_closed_form(const NonlinearitySpec& f, double u);
double majorant_closed_form(const NonlinearitySpec& f, double u);

struct EnvelopeReport {
    double tail_integral = 0.0;      // integral over [1,inf) of du / f_m(u)
    bool tail_integral_finite = false;
    double tail_exponent = 0.0;      // fitted large-u exponent of 1/f_m
    double limit_ratio_at_zero = 0.0; // estimate of lim_{u->0} f_M(u)/u
    bool limit_is_zero = false;
    bool conditions_hold = false;
    // probe samples (u, f_m(u), f_M(u)) for reporting
    std::vector<std::array<double, 3>> samples;
};

// Checks the two envelope conditions that the comparison argument needs:
// a finite tail integral of 1/f_m and f_M(u)/u -> 0 at the origin.
EnvelopeReport check_envelope_conditions(const NonlinearitySpec& f,
                                         double zero_tol = 1e-4);

// Integral over [g/epsilon, inf) of dy / f_m(y). Requires the envelope
// conditions to hold; diverges otherwise and throws.
double minorant_tail_integral(const NonlinearitySpec& f, double epsilon, double g);

} // namespace mlnk
