#include "mlnk/criterion.hpp"
#include "mlnk/errors.hpp"
#include "mlnk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mlnk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// exponent governing f(u) as u -> 0 for the built-in families
double smallest_exponent(const NonlinearitySpec& f) {
    switch (f.family) {
    case FFamily::Power:
        return f.p;
    case FFamily::PowerSum:
        return f.q;
    case FFamily::LogPower:
        return f.p; // (1+u) log(1+u)^p behaves like u^p near zero
    case FFamily::CustomTable:
        throw UnsupportedFamilyError("tables have no designated small-u exponent");
    }
    throw UnsupportedFamilyError("unknown nonlinearity family");
}

// exact integral of h over [0, T]
double integral_h(const TimeWeightSpec& h, double T) {
    switch (h.family) {
    case HFamily::Constant:
        return h.c * T;
    case HFamily::PowerT:
        if (h.r <= -1.0)
            throw DomainError("weight not integrable at t = 0");
        return std::pow(T, 1.0 + h.r) / (1.0 + h.r);
    case HFamily::PowerSumT:
        if (h.s <= -1.0)
            throw DomainError("weight not integrable at t = 0");
        return std::pow(T, 1.0 + h.r) / (1.0 + h.r) +
               std::pow(T, 1.0 + h.s) / (1.0 + h.s);
    case HFamily::ExpT:
        return h.theta == 0.0 ? T : std::expm1(h.theta * T) / h.theta;
    }
    throw UnsupportedFamilyError("unknown time weight family");
}

} // namespace

void CriterionProblem::validate() const {
    if (d < 1 || d > 3)
        throw ValidationError("dimension must be 1, 2 or 3");
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw ValidationError("sigma must lie in (0, 1)");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ValidationError("epsilon must be positive and finite");
    f.validate();
    h.validate();
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Diverges:
        return "diverges";
    case Verdict::Converges:
        return "converges";
    case Verdict::Undetermined:
        return "undetermined";
    }
    return "unknown";
}

double criterion_integrand(const CriterionProblem& p, double t) {
    if (!(t > 0.0))
        throw DomainError("criterion integrand needs t > 0");
    double b = p.beta();
    return eval_h(p.h, t) * std::pow(t, b) * eval_f(p.f, p.epsilon * std::pow(t, -b));
}

double log_criterion_integrand(const CriterionProblem& p, double t) {
    double b = p.beta();
    double lt = std::log(t);
    double log_u = std::log(p.epsilon) - b * lt;
    return log_eval_h(p.h, t) + b * lt + log_eval_f(p.f, log_u);
}

CriterionVerdict classify_numeric(const CriterionProblem& p, int k_max,
                                  double margin_tol, int order) {
    p.validate();
    if (k_max < 12)
        throw ValidationError("classification needs at least 12 dyadic panels");
    if (!(margin_tol > 0.0))
        throw ValidationError("margin tolerance must be positive");

    auto logf = [&](double t) { return log_criterion_integrand(p, t); };

    CriterionVerdict v;
    std::vector<double> logS(k_max);
    double acc = 0.0;
    bool all_zero = true;
    for (int k = 0; k < k_max; ++k) {
        double a = std::ldexp(1.0, k), b = std::ldexp(1.0, k + 1);
        logS[k] = quad::gauss_log(a, b, order, logf);
        if (logS[k] > -kInf)
            all_zero = false;
        acc += std::exp(logS[k]);
        v.partial_sums.push_back(acc);
    }
    if (std::isinf(acc))
        v.saturated = true;

    if (all_zero) {
        v.status = Verdict::Converges;
        v.fitted_exponent = -kInf;
        v.margin = kInf;
        v.note = "integrand identically zero";
        return v;
    }

    // a run of geometrically accelerating increments marks exp(c t) behaviour,
    // which no power-law fit should be trusted on
    double d1 = logS[k_max - 3] - logS[k_max - 4];
    double d2 = logS[k_max - 2] - logS[k_max - 3];
    double d3 = logS[k_max - 1] - logS[k_max - 2];
    if (std::abs(d3) > 30.0 && std::abs(d3) > 1.7 * std::abs(d2) &&
        std::abs(d2) > 1.7 * std::abs(d1)) {
        v.exponential = true;
        v.growth_sign = d3 > 0.0 ? 1 : -1;
        v.status = v.growth_sign > 0 ? Verdict::Diverges : Verdict::Converges;
        v.fitted_exponent = kNaN;
        v.margin = kInf;
        v.note = "panel sums accelerate geometrically";
        return v;
    }

    int window = std::min(8, k_max);
    std::vector<double> xs, ys;
    bool window_zero = false;
    for (int k = k_max - window; k < k_max; ++k) {
        if (logS[k] == -kInf) {
            window_zero = true;
            break;
        }
        xs.push_back(double(k));
        ys.push_back(logS[k]);
    }
    if (window_zero) {
        v.status = Verdict::Converges;
        v.fitted_exponent = -kInf;
        v.margin = kInf;
        v.note = "integrand vanishes at large t";
        return v;
    }

    quad::LinearFit fit = quad::fit_line(xs, ys);
    v.fitted_exponent = fit.slope / std::log(2.0) - 1.0;
    v.margin = std::abs(v.fitted_exponent + 1.0);

    if (v.saturated) {
        v.status = Verdict::Diverges;
        v.note = "partial sums overflowed double range; divergence certain";
        return v;
    }
    if (v.fitted_exponent >= -1.0 + margin_tol)
        v.status = Verdict::Diverges;
    else if (v.fitted_exponent <= -1.0 - margin_tol)
        v.status = Verdict::Converges;
    else {
        v.status = Verdict::Undetermined;
        v.note = "fitted exponent inside the dead band around -1";
    }
    return v;
}

CriterionVerdict classify_analytic(const CriterionProblem& p) {
    p.validate();
    CriterionVerdict v;
    v.partial_sums.clear();

    if (p.h.family == HFamily::Constant && p.h.c == 0.0) {
        v.status = Verdict::Converges;
        v.fitted_exponent = -kInf;
        v.margin = kInf;
        v.note = "zero weight";
        return v;
    }
    if (p.h.family == HFamily::ExpT && p.h.theta != 0.0) {
        v.exponential = true;
        v.growth_sign = p.h.theta > 0.0 ? 1 : -1;
        v.status = v.growth_sign > 0 ? Verdict::Diverges : Verdict::Converges;
        v.fitted_exponent = kNaN;
        v.margin = kInf;
        v.note = "exponential weight decided by the sign of its rate";
        return v;
    }

    double growth = (p.h.family == HFamily::ExpT) ? 0.0 : p.h.growth_exponent();
    double qmin = smallest_exponent(p.f);
    double rho = growth + p.beta() * (1.0 - qmin);
    v.fitted_exponent = rho;
    v.margin = std::abs(rho + 1.0);
    v.status = rho >= -1.0 ? Verdict::Diverges : Verdict::Converges;
    std::ostringstream os;
    os << "integrand ~ t^" << rho << "; borderline -1 "
       << (rho >= -1.0 ? "included in divergence" : "not reached");
    v.note = os.str();
    return v;
}

ThresholdReport fujita_threshold(const NonlinearitySpec& f, const TimeWeightSpec& h,
                                 int d, double sigma) {
    if (d < 1 || d > 3)
        throw ValidationError("dimension must be 1, 2 or 3");
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw ValidationError("sigma must lie in (0, 1)");
    f.validate();
    h.validate();
    if (f.family == FFamily::CustomTable)
        throw UnsupportedFamilyError("tables have no sweep exponent");
    if (h.family == HFamily::ExpT)
        throw UnsupportedFamilyError(
            "exponential weights have no power threshold; the rate sign decides");
    if (h.family == HFamily::Constant && h.c == 0.0)
        throw ValidationError("zero weight has no threshold");

    double growth = h.growth_exponent();
    ThresholdReport rep;
    rep.closed_form = 1.0 + 2.0 * sigma * (1.0 + growth) / double(d);

    auto with_exponent = [&](double e) {
        NonlinearitySpec g = f;
        if (f.family == FFamily::PowerSum)
            g.q = e;
        else
            g.p = e;
        return g;
    };
    auto sign_at = [&](double e) {
        CriterionProblem prob;
        prob.d = d;
        prob.sigma = sigma;
        prob.f = with_exponent(e);
        prob.h = h;
        prob.epsilon = 0.3;
        CriterionVerdict cv = classify_numeric(prob, 40);
        return cv.fitted_exponent + 1.0;
    };

    std::ostringstream desc;
    desc << (f.family == FFamily::PowerSum ? "q" : "p") << " in " << f.describe();
    rep.sweep_description = desc.str();

    double lo = 1.05, hi = 8.5;
    if (f.family == FFamily::PowerSum)
        hi = std::min(hi, f.p);
    if (hi <= lo) {
        rep.note = "sweep range empty; fixed exponents leave no room";
        return rep;
    }
    double s_lo = sign_at(lo), s_hi = sign_at(hi);
    if (s_lo < 0.0 && s_hi > 0.0)
        throw InconsistencyError("classification not monotone across the sweep range");
    if (s_lo < 0.0 || s_hi > 0.0) {
        rep.note = s_lo < 0.0 ? "whole sweep range converges; threshold below range"
                              : "whole sweep range diverges; threshold above range";
        return rep;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
        double mid = 0.5 * (lo + hi);
        (sign_at(mid) >= 0.0 ? lo : hi) = mid;
    }
    rep.bisection = 0.5 * (lo + hi);
    rep.has_bisection = true;
    rep.gap = std::abs(rep.bisection - rep.closed_form);
    return rep;
}

OrbitIntegralReport orbit_criterion_integral(const GridField& u0,
                                             const CriterionProblem& p,
                                             double t_max, int times_per_decade) {
    p.validate();
    if (p.f.family == FFamily::CustomTable)
        throw UnsupportedFamilyError("orbit verdict needs a family exponent");
    if (!(t_max > 0.0))
        throw DomainError("orbit integral needs t_max > 0");
    if (times_per_decade < 2)
        throw ValidationError("need at least 2 times per decade");
    if (u0.grid.d != p.d)
        throw ValidationError("field dimension does not match the problem");

    const int decades = 4;
    int count = decades * times_per_decade + 1;
    std::vector<double> times(count);
    double t_lo = t_max * 1e-4;
    for (int i = 0; i < count; ++i)
        times[i] = t_lo * std::pow(t_max / t_lo, double(i) / double(count - 1));
    times.back() = t_max;

    OrbitIntegralReport rep;
    rep.curve = supnorm_decay_curve(u0, p.sigma, times);

    auto g_at = [&](double t, double N) {
        return eval_h(p.h, t) * eval_f(p.f, N) / N;
    };
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = g_at(rep.curve[i].t, rep.curve[i].sup);

    double value = 0.0;
    for (int i = 1; i < count; ++i)
        value += 0.5 * (g[i] + g[i - 1]) * (rep.curve[i].t - rep.curve[i - 1].t);
    // close the [0, t_first] strip: N is flat there, h integrates exactly
    double N0 = u0.sup_norm();
    value += eval_f(p.f, N0) / N0 * integral_h(p.h, times.front());
    rep.value = value;

    // fitted decay of the orbit over the last decade, equilibrium level removed
    rep.floor = u0.mean();
    std::vector<double> lx, ly;
    for (const auto& pt : rep.curve) {
        if (pt.t >= t_max / 10.0) {
            double corr = std::max(pt.sup - rep.floor, 1e-300);
            lx.push_back(std::log(pt.t));
            ly.push_back(std::log(corr));
        }
    }
    quad::LinearFit fit = quad::fit_line(lx, ly);
    rep.fitted_decay_slope = fit.slope;
    rep.fit_residual = fit.residual_rms;

    // tail continuation and verdict from the family structure: along the
    // orbit the integrand behaves like t^(growth - beta (qmin - 1))
    double qmin = smallest_exponent(p.f);
    if (p.h.family == HFamily::ExpT && p.h.theta != 0.0) {
        if (p.h.theta > 0.0) {
            rep.tail_estimate = kInf;
            rep.verdict = Verdict::Diverges;
        } else {
            rep.tail_estimate = g.back() / -p.h.theta;
            rep.verdict = Verdict::Converges;
        }
    } else if (p.h.family == HFamily::Constant && p.h.c == 0.0) {
        rep.tail_estimate = 0.0;
        rep.verdict = Verdict::Converges;
    } else {
        double growth = (p.h.family == HFamily::ExpT) ? 0.0 : p.h.growth_exponent();
        double rho = growth - p.beta() * (qmin - 1.0);
        if (rho < -1.0) {
            rep.tail_estimate = g.back() * t_max / (-1.0 - rho);
            rep.verdict = Verdict::Converges;
        } else {
            rep.tail_estimate = kInf;
            rep.verdict = Verdict::Diverges;
        }
    }
    rep.total = rep.value + rep.tail_estimate;
    return rep;
}

double criterion_cumulative(const CriterionProblem& p, double t) {
    p.validate();
    if (!(t >= 1.0))
        throw DomainError("cumulative criterion starts at t = 1");
    double pref = std::pow(2.0, -p.beta()) * p.epsilon;
    auto fn = [&](double s) { return criterion_integrand(p, s); };
    double acc = 0.0;
    for (int j = 0; j < 1100; ++j) {
        double a = std::ldexp(1.0, j), b = std::ldexp(1.0, j + 1);
        if (a >= t)
            break;
        acc += quad::gauss(a, std::min(b, t), 16, fn);
        if (b >= t)
            break;
    }
    return pref * acc;
}

double blowup_time_upper_bound(const CriterionProblem& p, double start_level) {
    p.validate();
    if (!(start_level > 0.0))
        throw DomainError("start level must be positive");
    CriterionVerdict av = classify_analytic(p);
    if (av.status == Verdict::Converges)
        return kInf;

    double target = minorant_tail_integral(p.f, p.epsilon, start_level);
    double pref = std::pow(2.0, -p.beta()) * p.epsilon;
    auto fn = [&](double s) { return criterion_integrand(p, s); };

    // march dyadic panels until the cumulative mass crosses the target
    double acc = 0.0;
    int j = 0;
    for (; j < 1020; ++j) {
        double a = std::ldexp(1.0, j), b = std::ldexp(1.0, j + 1);
        double s = quad::gauss(a, b, 16, fn);
        if (pref * (acc + s) >= target)
            break;
        acc += s;
    }
    if (j >= 1020)
        throw RangeError("upper bound exceeds the representable time range");

    double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double gmid = pref * (acc + quad::gauss(std::ldexp(1.0, j), mid, 16, fn));
        (gmid >= target ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace mlnk
