#include "mlnk/nonlinearity.hpp"
#include "mlnk/errors.hpp"
#include "mlnk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mlnk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double table_eval(const std::vector<std::pair<double, double>>& t, double u) {
    if (u < t.front().first || u > t.back().first) {
        std::ostringstream os;
        os << "table query u=" << u << " outside sampled range ["
           << t.front().first << ", " << t.back().first << "]";
        throw RangeError(os.str());
    }
    auto it = std::lower_bound(t.begin(), t.end(), u,
                               [](auto& a, double v) { return a.first < v; });
    if (it == t.begin())
        return it->second;
    auto lo = std::prev(it);
    double w = (u - lo->first) / (it->first - lo->first);
    return lo->second + w * (it->second - lo->second);
}

} // namespace

NonlinearitySpec NonlinearitySpec::power(double p, bool diagnostic) {
    NonlinearitySpec s;
    s.family = FFamily::Power;
    s.p = p;
    s.diagnostic = diagnostic;
    s.validate();
    return s;
}

NonlinearitySpec NonlinearitySpec::power_sum(double p, double q) {
    NonlinearitySpec s;
    s.family = FFamily::PowerSum;
    s.p = p;
    s.q = q;
    s.validate();
    return s;
}

NonlinearitySpec NonlinearitySpec::log_power(double p) {
    NonlinearitySpec s;
    s.family = FFamily::LogPower;
    s.p = p;
    s.validate();
    return s;
}

NonlinearitySpec NonlinearitySpec::custom_table(std::vector<std::pair<double, double>> t) {
    NonlinearitySpec s;
    s.family = FFamily::CustomTable;
    s.table = std::move(t);
    s.validate();
    return s;
}

void NonlinearitySpec::validate() const {
    switch (family) {
    case FFamily::Power:
        if (!diagnostic && !(p > 1.0))
            throw ValidationError("power family needs p > 1");
        if (diagnostic && !(p > 0.0))
            throw ValidationError("power family needs p > 0");
        break;
    case FFamily::PowerSum:
        if (!(q > 1.0) || !(p >= q))
            throw ValidationError("power_sum family needs p >= q > 1");
        break;
    case FFamily::LogPower:
        if (!(p > 1.0))
            throw ValidationError("log_power family needs p > 1");
        break;
    case FFamily::CustomTable: {
        if (table.size() < 3)
            throw ValidationError("custom table needs at least 3 samples");
        if (table.front().first != 0.0 || table.front().second != 0.0)
            throw ValidationError("custom table must start at (0, 0)");
        double prev_slope = -kInf;
        for (size_t i = 1; i < table.size(); ++i) {
            auto [u0, f0] = table[i - 1];
            auto [u1, f1] = table[i];
            if (!(u1 > u0))
                throw ValidationError("custom table abscissae must increase");
            if (f1 < f0)
                throw ValidationError("custom table values must not decrease");
            double slope = (f1 - f0) / (u1 - u0);
            if (slope < prev_slope * (1.0 - 1e-12) - 1e-300)
                throw ValidationError("custom table must be convex");
            prev_slope = slope;
        }
        break;
    }
    }
}

std::string NonlinearitySpec::describe() const {
    std::ostringstream os;
    switch (family) {
    case FFamily::Power:
        os << "power(p=" << p << ")";
        break;
    case FFamily::PowerSum:
        os << "power_sum(p=" << p << ", q=" << q << ")";
        break;
    case FFamily::LogPower:
        os << "log_power(p=" << p << ")";
        break;
    case FFamily::CustomTable:
        os << "custom_table(" << table.size() << " samples)";
        break;
    }
    return os.str();
}

TimeWeightSpec TimeWeightSpec::constant(double c) {
    TimeWeightSpec s;
    s.family = HFamily::Constant;
    s.c = c;
    s.validate();
    return s;
}

TimeWeightSpec TimeWeightSpec::power_t(double r) {
    TimeWeightSpec s;
    s.family = HFamily::PowerT;
    s.r = r;
    s.validate();
    return s;
}

TimeWeightSpec TimeWeightSpec::power_sum_t(double r, double s_) {
    TimeWeightSpec s;
    s.family = HFamily::PowerSumT;
    s.r = r;
    s.s = s_;
    s.validate();
    return s;
}

TimeWeightSpec TimeWeightSpec::exp_t(double theta) {
    TimeWeightSpec s;
    s.family = HFamily::ExpT;
    s.theta = theta;
    s.validate();
    return s;
}

void TimeWeightSpec::validate() const {
    switch (family) {
    case HFamily::Constant:
        if (!(c >= 0.0))
            throw ValidationError("constant weight needs c >= 0");
        break;
    case HFamily::PowerT:
        if (!std::isfinite(r))
            throw ValidationError("power_t weight needs finite r");
        break;
    case HFamily::PowerSumT:
        if (!std::isfinite(r) || !std::isfinite(s) || !(s <= r))
            throw ValidationError("power_sum_t weight needs s <= r, both finite");
        break;
    case HFamily::ExpT:
        if (!std::isfinite(theta))
            throw ValidationError("exp_t weight needs finite theta");
        break;
    }
}

std::string TimeWeightSpec::describe() const {
    std::ostringstream os;
    switch (family) {
    case HFamily::Constant:
        os << "constant(c=" << c << ")";
        break;
    case HFamily::PowerT:
        os << "power_t(r=" << r << ")";
        break;
    case HFamily::PowerSumT:
        os << "power_sum_t(r=" << r << ", s=" << s << ")";
        break;
    case HFamily::ExpT:
        os << "exp_t(theta=" << theta << ")";
        break;
    }
    return os.str();
}

double TimeWeightSpec::growth_exponent() const {
    switch (family) {
    case HFamily::Constant:
        return 0.0;
    case HFamily::PowerT:
        return r;
    case HFamily::PowerSumT:
        return r; // r >= s, so t^r dominates at large t
    case HFamily::ExpT:
        throw UnsupportedFamilyError("exp_t has no power-law growth exponent");
    }
    throw UnsupportedFamilyError("unknown time weight family");
}

double eval_f(const NonlinearitySpec& f, double u) {
    if (!(u >= 0.0))
        throw DomainError("eval_f needs u >= 0");
    switch (f.family) {
    case FFamily::Power:
        return std::pow(u, f.p);
    case FFamily::PowerSum:
        return std::pow(u, f.p) + std::pow(u, f.q);
    case FFamily::LogPower:
        return u == 0.0 ? 0.0 : (1.0 + u) * std::pow(std::log1p(u), f.p);
    case FFamily::CustomTable:
        return table_eval(f.table, u);
    }
    throw UnsupportedFamilyError("unknown nonlinearity family");
}

double log_eval_f(const NonlinearitySpec& f, double log_u) {
    switch (f.family) {
    case FFamily::Power:
        return f.p * log_u;
    case FFamily::PowerSum: {
        double a = f.p * log_u, b = f.q * log_u;
        double m = std::max(a, b);
        if (!std::isfinite(m))
            return m;
        return m + std::log1p(std::exp(std::min(a, b) - m));
    }
    case FFamily::LogPower: {
        if (log_u < -30.0)
            return f.p * log_u; // log1p(u) = u to machine precision here
        if (log_u > 30.0)
            return log_u + f.p * std::log(log_u);
        double u = std::exp(log_u);
        return std::log1p(u) + f.p * std::log(std::log1p(u));
    }
    case FFamily::CustomTable:
        return std::log(eval_f(f, std::exp(log_u)));
    }
    throw UnsupportedFamilyError("unknown nonlinearity family");
}

double eval_h(const TimeWeightSpec& h, double t) {
    if (!(t >= 0.0))
        throw DomainError("eval_h needs t >= 0");
    switch (h.family) {
    case HFamily::Constant:
        return h.c;
    case HFamily::PowerT:
        return std::pow(t, h.r);
    case HFamily::PowerSumT:
        return std::pow(t, h.r) + std::pow(t, h.s);
    case HFamily::ExpT:
        return std::exp(h.theta * t);
    }
    throw UnsupportedFamilyError("unknown time weight family");
}

double log_eval_h(const TimeWeightSpec& h, double t) {
    switch (h.family) {
    case HFamily::Constant:
        return std::log(h.c);
    case HFamily::PowerT:
        return h.r * std::log(t);
    case HFamily::PowerSumT: {
        double a = h.r * std::log(t), b = h.s * std::log(t);
        double m = std::max(a, b);
        if (!std::isfinite(m))
            return m;
        return m + std::log1p(std::exp(std::min(a, b) - m));
    }
    case HFamily::ExpT:
        return h.theta * t;
    }
    throw UnsupportedFamilyError("unknown time weight family");
}

namespace {

// Scan f(a*u)/f(a) over a geometric grid in a, then sharpen the winning
// estimate: golden-section around an interior extremum, linear
// extrapolation toward a = 0 when the boundary wins there.
double envelope_scan(const NonlinearitySpec& f, double u, int grid_size, bool want_max) {
    if (!(u >= 0.0))
        throw DomainError("envelope scan needs u >= 0");
    if (grid_size < 8)
        throw ValidationError("alpha grid needs at least 8 points");
    if (u == 0.0)
        return 0.0;

    auto ratio = [&](double a) { return eval_f(f, a * u) / eval_f(f, a); };
    const double a_lo = 1e-8, a_hi = 1.0 - 1e-8;
    const double g = std::pow(a_hi / a_lo, 1.0 / double(grid_size - 1));

    std::vector<double> as(grid_size), rs(grid_size);
    int best = 0;
    for (int i = 0; i < grid_size; ++i) {
        as[i] = a_lo * std::pow(g, i);
        rs[i] = ratio(as[i]);
        bool better = want_max ? rs[i] > rs[best] : rs[i] < rs[best];
        if (better)
            best = i;
    }
    double out = rs[best];

    if (best > 0 && best < grid_size - 1) {
        // interior extremum: golden-section refinement
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = as[best - 1], hi = as[best + 1];
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = ratio(x1), f2 = ratio(x2);
        for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
            bool keep_left = want_max ? f1 > f2 : f1 < f2;
            if (keep_left) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = ratio(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = ratio(x2);
            }
        }
        double mid = ratio(0.5 * (lo + hi));
        out = want_max ? std::max({out, f1, f2, mid}) : std::min({out, f1, f2, mid});
    } else if (best == 0) {
        // extremum pressed against a -> 0: extrapolate linearly through the
        // two smallest grid points to remove the O(a) boundary bias
        double ext = rs[0] - (rs[1] - rs[0]) * as[0] / (as[1] - as[0]);
        if (std::isfinite(ext))
            out = want_max ? std::max(out, ext) : std::min(out, ext);
    }
    return out;
}

// Closed-form envelope evaluator used internally wherever the formulas are
// exact; falls back to the numeric scan for tables.
double envelope_auto(const NonlinearitySpec& f, double u, bool want_max) {
    if (f.family == FFamily::CustomTable)
        return want_max ? majorant_numeric(f, u) : minorant_numeric(f, u);
    return want_max ? majorant_closed_form(f, u) : minorant_closed_form(f, u);
}

} // namespace

double minorant_numeric(const NonlinearitySpec& f, double u, int alpha_grid_size) {
    return envelope_scan(f, u, alpha_grid_size, false);
}

double majorant_numeric(const NonlinearitySpec& f, double u, int alpha_grid_size) {
    return envelope_scan(f, u, alpha_grid_size, true);
}

double minorant_closed_form(const NonlinearitySpec& f, double u) {
    if (!(u >= 0.0))
        throw DomainError("minorant needs u >= 0");
    switch (f.family) {
    case FFamily::Power:
        return std::pow(u, f.p);
    case FFamily::PowerSum:
        return std::min(std::pow(u, f.q),
                        0.5 * (std::pow(u, f.p) + std::pow(u, f.q)));
    case FFamily::LogPower: {
        if (u == 0.0)
            return 0.0;
        double at_one = (1.0 + u) * std::pow(std::log1p(u), f.p) /
                        (2.0 * std::pow(std::log(2.0), f.p));
        return std::min(std::pow(u, f.p), at_one);
    }
    case FFamily::CustomTable:
        throw UnsupportedFamilyError("no closed-form envelope for tables");
    }
    throw UnsupportedFamilyError("unknown nonlinearity family");
}

double majorant_closed_form(const NonlinearitySpec& f, double u) {
    if (!(u >= 0.0))
        throw DomainError("majorant needs u >= 0");
    switch (f.family) {
    case FFamily::Power:
        return std::pow(u, f.p);
    case FFamily::PowerSum:
        return std::max(std::pow(u, f.q),
                        0.5 * (std::pow(u, f.p) + std::pow(u, f.q)));
    case FFamily::LogPower: {
        // exact supremum only for p >= 2; see header note
        if (u == 0.0)
            return 0.0;
        double at_one = (1.0 + u) * std::pow(std::log1p(u), f.p) /
                        (2.0 * std::pow(std::log(2.0), f.p));
        return std::max(std::pow(u, f.p), at_one);
    }
    case FFamily::CustomTable:
        throw UnsupportedFamilyError("no closed-form envelope for tables");
    }
    throw UnsupportedFamilyError("unknown nonlinearity family");
}

EnvelopeReport check_envelope_conditions(const NonlinearitySpec& f, double zero_tol) {
    EnvelopeReport rep;

    // probe samples for the report
    const double probes[] = {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0};
    for (double u : probes) {
        double fm, fM;
        if (f.family == FFamily::CustomTable) {
            if (u > f.table.back().first)
                break;
            fm = minorant_numeric(f, u);
            fM = majorant_numeric(f, u);
        } else {
            fm = minorant_closed_form(f, u);
            fM = majorant_closed_form(f, u);
        }
        rep.samples.push_back({u, fm, fM});
    }

    // tail integral of 1/f_m over [1, inf) on dyadic panels, with the
    // large-u exponent read off the last panels
    auto inv_fm = [&](double u) { return 1.0 / envelope_auto(f, u, false); };
    std::vector<double> panel(48);
    double acc = 0.0;
    int used = 0;
    for (int k = 0; k < 48; ++k) {
        double a = std::ldexp(1.0, k), b = std::ldexp(1.0, k + 1);
        panel[k] = quad::gauss(a, b, 16, inv_fm);
        acc += panel[k];
        ++used;
        if (k >= 4 && panel[k] < 1e-16 * acc)
            break;
    }
    // fit log2 of the last three panel sums: slope = rho + 1 where
    // 1/f_m ~ u^rho at large u
    double s1 = panel[used - 3], s2 = panel[used - 2], s3 = panel[used - 1];
    double rho;
    if (s3 <= 0.0 || s2 <= 0.0 || s1 <= 0.0) {
        rho = -kInf; // integrand collapsed to zero; clearly integrable
    } else {
        rho = 0.5 * (std::log2(s3 / s2) + std::log2(s2 / s1)) - 1.0;
    }
    rep.tail_exponent = rho;
    if (rho < -1.0 - 0.02) {
        rep.tail_integral_finite = true;
        double r = (s2 > 0.0) ? s3 / s2 : 0.0;
        double remainder = (r > 0.0 && r < 1.0) ? panel[used - 1] * r / (1.0 - r) : 0.0;
        rep.tail_integral = acc + remainder;
    } else {
        // divergent, or too close to the borderline to certify
        rep.tail_integral_finite = false;
        rep.tail_integral = kInf;
    }

    // behaviour of f_M(u)/u at the origin
    double prev = kInf;
    bool decreasing = true;
    double last_ratio = kInf;
    for (int k = 1; k <= 8; ++k) {
        double u = std::pow(10.0, -k);
        if (f.family == FFamily::CustomTable && u > f.table.back().first)
            continue;
        double ratio = envelope_auto(f, u, true) / u;
        if (ratio > prev * (1.0 + 1e-9))
            decreasing = false;
        prev = ratio;
        last_ratio = ratio;
    }
    rep.limit_ratio_at_zero = last_ratio;
    rep.limit_is_zero = decreasing && last_ratio < zero_tol;

    rep.conditions_hold = rep.tail_integral_finite && rep.limit_is_zero;
    return rep;
}

double minorant_tail_integral(const NonlinearitySpec& f, double epsilon, double g) {
    if (!(epsilon > 0.0))
        throw DomainError("tail integral needs epsilon > 0");
    if (!(g > 0.0))
        throw DomainError("tail integral needs g > 0");
    EnvelopeReport rep = check_envelope_conditions(f);
    if (!rep.conditions_hold)
        throw CriterionInapplicableError(
            "envelope conditions fail; tail integral of 1/f_m diverges or is uncertified");

    auto inv_fm = [&](double y) { return 1.0 / envelope_auto(f, y, false); };
    double lo = g / epsilon;
    double acc = 0.0, prev_s = -1.0, last_s = 0.0;
    for (int k = 0; k < 60; ++k) {
        double a = lo * std::ldexp(1.0, k), b = lo * std::ldexp(1.0, k + 1);
        double s = quad::gauss(a, b, 16, inv_fm);
        acc += s;
        prev_s = (k == 0) ? -1.0 : last_s;
        last_s = s;
        if (k >= 4 && s < 1e-17 * acc)
            break;
    }
    // geometric extrapolation of the remaining octaves
    if (prev_s > 0.0 && last_s > 0.0) {
        double r = last_s / prev_s;
        if (r < 1.0)
            acc += last_s * r / (1.0 - r);
        else
            throw InconsistencyError("tail panels stopped decaying");
    }
    return acc;
}

} // namespace mlnk
