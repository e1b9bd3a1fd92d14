// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any fail. Tolerances are pinned here on
// purpose so regressions cannot hide behind config changes.

#include "mlnk/criterion.hpp"
#include "mlnk/errors.hpp"
#include "mlnk/grid.hpp"
#include "mlnk/kernel.hpp"
#include "mlnk/nonlinearity.hpp"
#include "mlnk/quadrature.hpp"
#include "mlnk/semigroup.hpp"
#include "mlnk/solver.hpp"
#include "mlnk/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#ifndef MLNK_BIN
#error "MLNK_BIN must point at the command line binary"
#endif

using namespace mlnk;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct CheckFail : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok)
        throw CheckFail(what);
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

template <class Fn>
void criterion(int id, const char* name, double time_limit_s, Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    std::string reason;
    try {
        fn();
    } catch (const std::exception& e) {
        reason = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (reason.empty() && secs > time_limit_s)
        reason = "runtime " + num(secs) + "s exceeds limit " + num(time_limit_s) + "s";
    if (reason.empty()) {
        std::printf("ACCEPTANCE %2d PASS  %-40s (%.2fs)\n", id, name, secs);
    } else {
        std::printf("ACCEPTANCE %2d FAIL  %-40s (%.2fs)  %s\n", id, name, secs,
                    reason.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

GridField gaussian_field(const GridSpec& g, double amplitude, double width) {
    GridField u(g);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        auto j = g.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < g.d; ++a) {
            double x = g.coord(j[a]);
            r2 += x * x;
        }
        u.values[i] = amplitude * std::exp(-r2 / (2.0 * width * width));
    }
    return u;
}

std::vector<double> log_times(double lo, double hi, int count) {
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i)
        t[i] = lo * std::pow(hi / lo, double(i) / double(count - 1));
    t.back() = hi;
    return t;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

const double kSigmas[3] = {0.25, 0.5, 0.75};

// 1. density properties of the synthesized kernel across sigma and t
void crit_density() {
    GridSpec g{1, 4096, 200.0};
    for (double sigma : kSigmas) {
        for (double t : {0.1, 1.0, 10.0}) {
            KernelSample k = kernel_from_symbol(g, sigma, t);
            KernelCheck c = verify_density_properties(k);
            std::string tag = " (sigma=" + num(sigma) + ", t=" + num(t) + ")";
            expect(c.mass_error <= 1e-6, "mass error " + num(c.mass_error) + tag);
            expect(c.symmetry_error <= 1e-12,
                   "symmetry error " + num(c.symmetry_error) + tag);
            expect(c.min_value >= -1e-9, "min value " + num(c.min_value) + tag);
            expect(c.ok(), "density check flags" + tag);
        }
    }
}

// 2. p_t convolved with p_s reproduces p_{t+s}
void crit_semigroup_identity() {
    GridSpec g{1, 4096, 200.0};
    const double pairs[3][2] = {{1.0, 1.0}, {0.5, 1.5}, {2.0, 3.0}};
    for (double sigma : kSigmas) {
        for (const auto& ts : pairs) {
            double dev = verify_semigroup_property(g, sigma, ts[0], ts[1]);
            expect(dev <= 1e-8, "deviation " + num(dev) + " at sigma=" + num(sigma) +
                                    ", t=" + num(ts[0]) + ", s=" + num(ts[1]));
        }
    }
}

// 3. at order one half the fractional factor is the explicit Cauchy profile,
// and the two kernel constructions agree
void crit_closed_form_anchor() {
    GridSpec g{1, 32768, 1000.0};
    const double t = 1.0;

    // synthesize the fractional factor alone: multiplier exp(-t |xi|)
    std::size_t total = g.total_points();
    std::vector<std::complex<double>> spec(total);
    for (std::size_t i = 0; i < total; ++i) {
        double xi = std::abs(g.freq(int(i)));
        double phase = (i & 1) ? -1.0 : 1.0;
        spec[i] = phase * std::exp(-t * xi);
    }
    auto& ws = TransformWorkspace::local(g);
    std::vector<double> vals;
    ws.backward(spec, vals);
    for (double& v : vals)
        v /= 2.0 * g.L;

    double dev = 0.0;
    for (int j = 0; j < g.n; ++j) {
        double x = g.coord(j);
        double cauchy = t / (std::numbers::pi * (t * t + x * x));
        dev = std::max(dev, std::abs(vals[std::size_t(j)] - cauchy));
    }
    expect(dev <= 1e-6, "fractional factor deviates from the Cauchy profile by " + num(dev));

    KernelSample a = kernel_from_symbol(g, 0.5, t);
    KernelSample b = kernel_convolution_form(g, 0.5, t);
    double dev2 = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        dev2 = std::max(dev2, std::abs(a.values.values[i] - b.values.values[i]));
    expect(dev2 <= 1e-7, "construction mismatch " + num(dev2));
}

// 4. sup norm decay of an integrable bump follows t^(-1) with the measured
// front constant as a pointwise upper bound
void crit_decay_law() {
    GridSpec g{1, 1 << 20, 163840.0};
    GridField u0 = gaussian_field(g, 1.0, 1.0);
    auto times = log_times(1e2, 1e4, 25);
    auto curve = supnorm_decay_curve(u0, 0.5, times);
    quad::LinearFit fit = fit_decay_exponent(curve, 1e2, 1e4);
    expect(std::abs(fit.slope + 1.0) <= 0.1, "decay slope " + num(fit.slope));

    ScalingBoundsReport rep = verify_bounds(g, 0.5, {100.0, 1000.0, 10000.0});
    expect(rep.beta == 1.0, "beta " + num(rep.beta));
    expect(rep.upper_ok && rep.lower_ok, "scaled sup spread out of range");
    expect(rep.cstar >= 0.25 && rep.cstar <= 0.4, "front constant " + num(rep.cstar));

    double mass = u0.l1_mass();
    for (const auto& pt : curve) {
        double bound = rep.cstar * mass / pt.t * (1.0 + 1e-9);
        expect(pt.sup <= bound, "curve value " + num(pt.sup) + " above bound " +
                                    num(bound) + " at t=" + num(pt.t));
    }
}

// 5. power family threshold grid: analytic rule exact, numeric agrees off
// the dead band
void crit_power_grid() {
    for (int d = 1; d <= 3; ++d) {
        for (double sigma : kSigmas) {
            double thresh = 1.0 + 2.0 * sigma / double(d);
            for (int k = 0; k < 20; ++k) {
                double p = double(11 + k) / 10.0;
                CriterionProblem prob{d, sigma, NonlinearitySpec::power(p),
                                      TimeWeightSpec::constant(1.0), 0.5};
                Verdict want = p <= thresh + 1e-12 ? Verdict::Diverges
                                                   : Verdict::Converges;
                std::string tag = " (d=" + std::to_string(d) + ", sigma=" +
                                  num(sigma) + ", p=" + num(p) + ")";
                CriterionVerdict an = classify_analytic(prob);
                expect(an.status == want, "analytic verdict off" + tag);

                CriterionVerdict nu = classify_numeric(prob);
                double rho = prob.beta() * (1.0 - p);
                if (std::abs(rho + 1.0) >= 0.05)
                    expect(nu.status == want, "numeric verdict off" + tag);
                else
                    expect(nu.status == want || nu.status == Verdict::Undetermined,
                           "numeric verdict contradicts" + tag);
            }
        }
    }
}

// 6. bisected threshold under polynomial weights matches the closed form
void crit_weighted_threshold() {
    for (int r : {0, 1, 2}) {
        ThresholdReport rep = fujita_threshold(NonlinearitySpec::power(2.0),
                                               TimeWeightSpec::power_t(double(r)),
                                               1, 0.5);
        double want = 2.0 + double(r);
        std::string tag = " (r=" + std::to_string(r) + ")";
        expect(std::abs(rep.closed_form - want) <= 1e-12,
               "closed form " + num(rep.closed_form) + tag);
        expect(rep.has_bisection, "no bisection result" + tag);
        expect(std::abs(rep.bisection - want) <= 0.02,
               "bisection " + num(rep.bisection) + tag);
        expect(rep.gap <= 0.02, "gap " + num(rep.gap) + tag);
    }
}

// 7. exponential weights are decided by the sign of the rate alone
void crit_exponential_sign() {
    for (double theta : {-1.0, -0.1, -0.01, 0.01, 0.1, 1.0}) {
        for (double p : {1.5, 3.0}) {
            CriterionProblem prob{1, 0.5, NonlinearitySpec::power(p),
                                  TimeWeightSpec::exp_t(theta), 0.5};
            Verdict want = theta > 0.0 ? Verdict::Diverges : Verdict::Converges;
            std::string tag = " (theta=" + num(theta) + ", p=" + num(p) + ")";
            CriterionVerdict an = classify_analytic(prob);
            expect(an.status == want && an.exponential, "analytic rate rule off" + tag);
            CriterionVerdict nu = classify_numeric(prob);
            expect(nu.status == want, "numeric verdict off" + tag);
            expect(nu.exponential, "numeric missed the exponential trend" + tag);
            expect(nu.growth_sign == (theta > 0.0 ? 1 : -1), "growth sign off" + tag);
        }
    }
}

// 8. for a two-term power sum the small exponent governs: (5, 1.5) diverges
// although judging by the large exponent alone would predict decay, and the
// threshold sweep reports q as the decisive exponent
void crit_sum_arbitration() {
    CriterionProblem prob{1, 0.5, NonlinearitySpec::power_sum(5.0, 1.5),
                          TimeWeightSpec::power_sum_t(0.0, 0.0), 0.5};
    CriterionVerdict nu = classify_numeric(prob);
    expect(nu.status == Verdict::Diverges, "sum verdict not divergent");
    expect(std::abs(nu.fitted_exponent + 0.5) <= 1e-6,
           "fitted exponent " + num(nu.fitted_exponent));
    CriterionVerdict an = classify_analytic(prob);
    expect(an.status == Verdict::Diverges, "analytic sum verdict not divergent");

    // the large exponent alone sits above the threshold and would decay
    CriterionProblem alt{1, 0.5, NonlinearitySpec::power(5.0),
                         TimeWeightSpec::power_sum_t(0.0, 0.0), 0.5};
    expect(classify_analytic(alt).status == Verdict::Converges,
           "pure large-exponent comparison not convergent");

    ThresholdReport rep = fujita_threshold(NonlinearitySpec::power_sum(5.0, 2.0),
                                           TimeWeightSpec::constant(1.0), 1, 0.5);
    expect(std::abs(rep.closed_form - 2.0) <= 1e-12,
           "closed form " + num(rep.closed_form));
    expect(rep.has_bisection && std::abs(rep.bisection - 2.0) <= 0.02,
           "swept threshold " + num(rep.bisection));
    expect(!rep.sweep_description.empty() && rep.sweep_description[0] == 'q',
           "sweep does not name the small exponent: " + rep.sweep_description);
}

// 9. the integral along the actual orbit reaches the same verdict as the
// family rule, at every data amplitude
void crit_orbit_consistency() {
    struct Case {
        NonlinearitySpec f;
        TimeWeightSpec h;
        double sigma;
        Verdict want;
    };
    const Case cases[] = {
        {NonlinearitySpec::power(1.5), TimeWeightSpec::constant(1.0), 0.5, Verdict::Diverges},
        {NonlinearitySpec::power(3.0), TimeWeightSpec::constant(1.0), 0.5, Verdict::Converges},
        {NonlinearitySpec::power(2.0), TimeWeightSpec::power_t(1.0), 0.5, Verdict::Diverges},
        {NonlinearitySpec::power(4.0), TimeWeightSpec::power_t(1.0), 0.5, Verdict::Converges},
        {NonlinearitySpec::log_power(2.0), TimeWeightSpec::constant(1.0), 0.5, Verdict::Diverges},
        {NonlinearitySpec::log_power(4.0), TimeWeightSpec::power_t(1.0), 0.5, Verdict::Converges},
        {NonlinearitySpec::power_sum(3.0, 1.5), TimeWeightSpec::constant(1.0), 0.5, Verdict::Diverges},
        {NonlinearitySpec::power_sum(4.0, 3.0), TimeWeightSpec::constant(1.0), 0.5, Verdict::Converges},
        {NonlinearitySpec::power(2.0), TimeWeightSpec::exp_t(0.1), 0.5, Verdict::Diverges},
        {NonlinearitySpec::power(1.5), TimeWeightSpec::exp_t(-0.1), 0.5, Verdict::Converges},
        {NonlinearitySpec::power(2.0), TimeWeightSpec::constant(1.0), 0.75, Verdict::Diverges},
        {NonlinearitySpec::power(4.0), TimeWeightSpec::constant(1.0), 0.75, Verdict::Converges},
    };
    GridSpec g{1, 65536, 10240.0};
    int id = 0;
    for (const Case& c : cases) {
        ++id;
        CriterionProblem prob{1, c.sigma, c.f, c.h, 1.0};
        Verdict an = classify_analytic(prob).status;
        expect(an == c.want, "analytic verdict off in case " + std::to_string(id));
        for (double amp : {5e-4, 0.05, 5.0}) {
            GridField u0 = gaussian_field(g, amp, 1.0);
            OrbitIntegralReport rep = orbit_criterion_integral(u0, prob, 1000.0, 8);
            std::string tag = " (case " + std::to_string(id) + ", amplitude " +
                              num(amp) + ")";
            expect(rep.verdict == an, "orbit verdict differs" + tag);
            expect(rep.value > 0.0 && std::isfinite(rep.value),
                   "orbit integral value bad" + tag);
            if (c.want == Verdict::Diverges)
                expect(std::isinf(rep.total), "divergent case has finite total" + tag);
            else
                expect(std::isfinite(rep.total) && rep.total >= rep.value,
                       "convergent case total bad" + tag);
        }
    }
}

// 10. scaling envelopes: closed forms match the scans, the bracket holds on
// a grid, and both structural conditions pass for the built-in families
void crit_envelopes() {
    const NonlinearitySpec fams[] = {
        NonlinearitySpec::power(2.0),
        NonlinearitySpec::power_sum(3.0, 2.0),
        NonlinearitySpec::log_power(2.0),
    };
    const double us[] = {0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0};
    for (const auto& f : fams) {
        for (double u : us) {
            double mc = minorant_closed_form(f, u);
            double mn = minorant_numeric(f, u);
            double Mc = majorant_closed_form(f, u);
            double Mn = majorant_numeric(f, u);
            std::string tag = " (" + f.describe() + ", u=" + num(u) + ")";
            expect(std::abs(mc - mn) <= 1e-6 * mc, "minorant mismatch" + tag);
            expect(std::abs(Mc - Mn) <= 1e-6 * Mc, "majorant mismatch" + tag);
        }
        // 50 x 50 bracket grid
        for (int iu = 0; iu < 50; ++iu) {
            double u = 0.01 * std::pow(1e4, double(iu) / 49.0);
            double lo = minorant_closed_form(f, u);
            double hi = majorant_closed_form(f, u);
            for (int ia = 0; ia < 50; ++ia) {
                double alpha = (double(ia) + 0.5) / 50.0;
                double ratio = eval_f(f, alpha * u) / eval_f(f, alpha);
                expect(ratio >= lo * (1.0 - 1e-9) && ratio <= hi * (1.0 + 1e-9),
                       "bracket fails for " + f.describe() + " at u=" + num(u) +
                           ", alpha=" + num(alpha));
            }
        }
        EnvelopeReport er = check_envelope_conditions(f);
        expect(er.conditions_hold, "envelope conditions fail for " + f.describe());
    }
    double phi = minorant_tail_integral(NonlinearitySpec::power(2.0), 0.5, 1.0);
    expect(std::abs(phi - 0.5) <= 1e-6, "tail transform " + num(phi));
}

// 11. the time stepper certifies blow-up for large data and clean decay for
// small data in the same setup
void crit_solver_runs() {
    EvolutionConfig cfg;
    cfg.grid = GridSpec{1, 4096, 40.0};
    cfg.sigma = 0.5;
    cfg.f = NonlinearitySpec::power(3.0);
    cfg.h = TimeWeightSpec::constant(1.0);
    cfg.u0.kind = InitialDataSpec::Kind::Gaussian;
    cfg.u0.amplitude = 10.0;
    cfg.u0.width = 1.0;
    cfg.horizon = 1.0;
    cfg.dt_init = 0.01;
    EvolutionResult res = evolve(cfg);
    expect(res.status == RunStatus::BlowUp, "large data did not blow up");
    expect(res.t_estimate > 0.001 && res.t_estimate < 0.5,
           "blow-up estimate " + num(res.t_estimate));
    expect(!res.trace.empty() && res.trace.back().sup > cfg.blowup_threshold,
           "trace did not cross the threshold");

    EvolutionConfig dec = cfg;
    dec.grid = GridSpec{1, 1 << 19, 81920.0};
    dec.u0.amplitude = 0.01;
    dec.horizon = 1000.0;
    dec.dt_init = 2.5;
    EvolutionResult res2 = evolve(dec);
    expect(res2.status == RunStatus::Decayed, "small data did not decay");
    double t_stop = res2.trace.back().t;
    expect(t_stop <= 1000.0, "decay certificate after the horizon");

    std::vector<double> lx, ly;
    for (const auto& s : res2.trace) {
        if (s.t >= t_stop / 10.0 && s.sup > 0.0) {
            lx.push_back(std::log(s.t));
            ly.push_back(std::log(s.sup));
        }
    }
    quad::LinearFit fit = quad::fit_line(lx, ly);
    expect(std::abs(fit.slope + 1.0) <= 0.15, "decay tail slope " + num(fit.slope));
}

// 12. the fixed-point construction contracts for a convergent configuration
void crit_picard() {
    PicardConfig pc;
    pc.grid = GridSpec{1, 8192, 1000.0};
    pc.sigma = 0.5;
    pc.f = NonlinearitySpec::power(3.0);
    pc.h = TimeWeightSpec::constant(1.0);
    pc.shape.kind = InitialDataSpec::Kind::Gaussian;
    pc.shape.amplitude = 0.05;
    pc.shape.width = 1.0;
    pc.iterations = 4;
    pc.t_samples.resize(20);
    for (int i = 0; i < 20; ++i)
        pc.t_samples[std::size_t(i)] = double(i + 1);
    PicardResult res = picard_iterate(pc);
    expect(res.mu > 0.0 && res.mu <= 1.0, "scale " + num(res.mu));
    expect(res.K > 1e-4 && res.K < 1e-2, "orbit constant " + num(res.K));
    expect(res.sup_curves.size() == 5, "iterate count off");
    for (const auto& row : res.sup_curves)
        expect(row.size() == 20, "sample count off");
    expect(res.diff_sup.size() == 4, "difference count off");
    expect(res.monotone, "iterate differences do not contract");
    expect(res.diff_sup[3] < res.diff_sup[1],
           "late difference " + num(res.diff_sup[3]) + " not below early " +
               num(res.diff_sup[1]));
    expect(res.bound_satisfied, "final iterate escapes the a priori bound");
}

// 13. cumulative criterion mass matches its closed form and its crossing
// with the tail transform bounds the blow-up time
void crit_cumulative_crossing() {
    CriterionProblem prob{1, 0.5, NonlinearitySpec::power(2.0),
                          TimeWeightSpec::constant(1.0), 0.5};
    for (double t : {std::exp(1.0), std::exp(2.0), 10.0, 100.0}) {
        double want = 0.0625 * std::log(t);
        double got = criterion_cumulative(prob, t);
        expect(std::abs(got - want) <= 1e-6,
               "cumulative mass " + num(got) + " vs " + num(want) + " at t=" + num(t));
    }
    expect(criterion_cumulative(prob, 1.0) == 0.0, "nonzero mass at the start");

    double phi = minorant_tail_integral(prob.f, prob.epsilon, 1.0);
    double tau = blowup_time_upper_bound(prob, 1.0);
    expect(std::isfinite(tau), "no finite bound on a divergent case");
    double gamma_tau = criterion_cumulative(prob, tau);
    expect(std::abs(gamma_tau - phi) <= 1e-6,
           "crossing defect " + num(gamma_tau - phi));
    expect(std::abs(tau - std::exp(8.0)) <= 1e-3 * std::exp(8.0),
           "bound " + num(tau) + " vs " + num(std::exp(8.0)));

    CriterionProblem conv{1, 0.5, NonlinearitySpec::power(3.0),
                          TimeWeightSpec::constant(1.0), 0.5};
    expect(std::isinf(blowup_time_upper_bound(conv, 1.0)),
           "convergent case lacks the infinite flag");
}

// 14. the suite binary is deterministic: two runs give identical bytes
void crit_determinism() {
    fs::path root = fs::temp_directory_path() /
                    ("mlnk_acc_" + std::to_string(::getpid()));
    fs::create_directories(root);
    auto run_suite = [&](const std::string& out) {
        std::string cmd = std::string("MLNK_WORKERS=4 \"") + MLNK_BIN +
                          "\" threshold-suite --out " + (root / out).string() +
                          " > " + (root / (out + ".log")).string() + " 2>&1";
        int rc = std::system(cmd.c_str());
        expect(rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0,
               "suite run " + out + " failed");
    };
    run_suite("a");
    run_suite("b");
    for (const char* f : {"summary.csv", "sum_family_threshold_note.txt", "suite.json"}) {
        std::string a = slurp(root / "a" / f);
        std::string b = slurp(root / "b" / f);
        expect(!a.empty(), std::string(f) + " is empty");
        expect(a == b, std::string(f) + " differs between runs");
    }
    expect(slurp(root / "a" / "suite.json").find("\"all_pass\": true") !=
               std::string::npos,
           "suite did not pass all cases");
    fs::remove_all(root);
}

} // namespace

int main() {
    criterion(1, "kernel density properties", 2.0, crit_density);
    criterion(2, "kernel convolution identity", 2.0, crit_semigroup_identity);
    criterion(3, "half-order closed-form anchor", 2.0, crit_closed_form_anchor);
    criterion(4, "sup-norm decay law", 10.0, crit_decay_law);
    criterion(5, "power family threshold grid", 30.0, crit_power_grid);
    criterion(6, "weighted threshold bisection", 30.0, crit_weighted_threshold);
    criterion(7, "exponential weight sign rule", 5.0, crit_exponential_sign);
    criterion(8, "sum family small-exponent arbitration", 5.0, crit_sum_arbitration);
    criterion(9, "orbit integral consistency", 60.0, crit_orbit_consistency);
    criterion(10, "scaling envelopes", 5.0, crit_envelopes);
    criterion(11, "solver blow-up and decay", 120.0, crit_solver_runs);
    criterion(12, "fixed-point contraction", 60.0, crit_picard);
    criterion(13, "cumulative crossing time", 5.0, crit_cumulative_crossing);
    criterion(14, "suite determinism", 120.0, crit_determinism);

    if (g_failures == 0) {
        std::printf("ACCEPTANCE SUMMARY 14/14 PASS\n");
        return 0;
    }
    std::printf("ACCEPTANCE SUMMARY %d/14 FAIL\n", g_failures);
    return 1;
}
