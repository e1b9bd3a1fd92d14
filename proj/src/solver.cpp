#include "mlnk/solver.hpp"
#include "mlnk/errors.hpp"
#include "mlnk/io.hpp"
#include "mlnk/kernel.hpp"
#include "mlnk/semigroup.hpp"
#include "mlnk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace mlnk {

void InitialDataSpec::validate() const {
    switch (kind) {
    case Kind::Gaussian:
    case Kind::Plateau:
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw ValidationError("initial data amplitude must be positive");
        if (!(width > 0.0) || !std::isfinite(width))
            throw ValidationError("initial data width must be positive");
        break;
    case Kind::FromFile:
        if (path.empty())
            throw ValidationError("initial data path is empty");
        break;
    }
}

GridField make_initial_data(const GridSpec& grid, const InitialDataSpec& spec) {
    grid.validate();
    spec.validate();
    if (spec.kind == InitialDataSpec::Kind::FromFile) {
        GridField f = read_field_binary(spec.path);
        if (!(f.grid == grid))
            throw ValidationError("field file grid does not match the configured grid");
        return f;
    }
    GridField u(grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        auto j = grid.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) {
            double x = grid.coord(j[a]) - spec.center[a];
            r2 += x * x;
        }
        double z = r2 / (spec.width * spec.width);
        if (spec.kind == InitialDataSpec::Kind::Gaussian)
            u.values[i] = spec.amplitude * std::exp(-z);
        else
            u.values[i] = spec.amplitude * std::exp(-(z * z * z * z));
    }
    return u;
}

void EvolutionConfig::validate() const {
    grid.validate();
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw ValidationError("sigma must lie in (0, 1)");
    f.validate();
    h.validate();
    u0.validate();
    if (!(horizon > 0.0))
        throw ValidationError("horizon must be positive");
    if (!(dt_init > 0.0))
        throw ValidationError("dt_init must be positive");
    if (!(dt_min > 0.0) || dt_min > dt_init)
        throw ValidationError("need 0 < dt_min <= dt_init");
    if (!(safety > 0.0) || safety > 1.0)
        throw ValidationError("safety factor must lie in (0, 1]");
    if (!(blowup_threshold > 0.0))
        throw ValidationError("blowup threshold must be positive");
    if (!(decay_fraction > 0.0) || decay_fraction >= 1.0)
        throw ValidationError("decay fraction must lie in (0, 1)");
}

double local_slope_bound(const NonlinearitySpec& f, double M) {
    if (!(M >= 0.0))
        throw DomainError("slope bound needs M >= 0");
    if (M == 0.0)
        return 0.0;
    const int intervals = 128;
    double du = M / double(intervals);
    double prev = 0.0, best = 0.0;
    for (int i = 1; i <= intervals; ++i) {
        double v = eval_f(f, du * double(i));
        best = std::max(best, (v - prev) / du);
        prev = v;
    }
    return best;
}

namespace {

// nonlinear kick followed by the exact linear flow, using a prebuilt symbol
GridField step_core(const GridField& u, double t, double dt,
                    const EvolutionConfig& cfg, const SpectralSymbol& sym) {
    double ht = eval_h(cfg.h, t);
    GridField v(u.grid);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        double ui = u.values[i];
        v.values[i] = ui + dt * ht * eval_f(cfg.f, std::max(ui, 0.0));
    }
    auto& ws = TransformWorkspace::local(u.grid);
    std::vector<std::complex<double>> spec;
    ws.forward(v.values, spec);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= std::exp(-dt * sym.values[i]);
    ws.backward(spec, v.values);
    double inv = 1.0 / double(u.grid.total_points());
    for (double& x : v.values)
        x *= inv;
    return v;
}

bool tail_strictly_decreasing(const std::vector<TraceSample>& tr, int count) {
    if (int(tr.size()) < count)
        return false;
    for (std::size_t i = tr.size() - count + 1; i < tr.size(); ++i)
        if (!(tr[i].sup < tr[i - 1].sup))
            return false;
    return true;
}

} // namespace

GridField step_exponential_euler(const GridField& u, double t, double dt,
                                 const EvolutionConfig& cfg) {
    if (!(dt > 0.0))
        throw DomainError("step needs dt > 0");
    SpectralSymbol sym = build_symbol(u.grid, cfg.sigma);
    return step_core(u, t, dt, cfg, sym);
}

const char* run_status_name(RunStatus s) {
    switch (s) {
    case RunStatus::Decayed:
        return "decayed";
    case RunStatus::BlowUp:
        return "blow_up";
    case RunStatus::HorizonReached:
        return "horizon_reached";
    }
    return "unknown";
}

EvolutionResult evolve(const EvolutionConfig& cfg) {
    cfg.validate();
    require_containment(cfg.grid, cfg.horizon);

    GridField u = make_initial_data(cfg.grid, cfg.u0);
    SpectralSymbol sym = build_symbol(cfg.grid, cfg.sigma);

    EvolutionResult res;
    double sup0 = u.sup_norm();
    if (sup0 == 0.0)
        throw DomainError("initial data is identically zero");
    res.trace.push_back({0.0, sup0, u.l1_mass(), 0.0});

    double t = 0.0;
    const long max_steps = 2'000'000;
    for (long step = 0;; ++step) {
        double M = res.trace.back().sup;
        if (!std::isfinite(M))
            throw InconsistencyError("field became nonfinite before any certified outcome");
        if (M > cfg.blowup_threshold) {
            res.status = RunStatus::BlowUp;
            break;
        }
        if (M < cfg.decay_fraction * sup0 && tail_strictly_decreasing(res.trace, 10)) {
            res.status = RunStatus::Decayed;
            break;
        }
        if (t >= cfg.horizon * (1.0 - 1e-12)) {
            res.status = RunStatus::HorizonReached;
            break;
        }
        if (step >= max_steps)
            throw StalledError("step budget exhausted without a certified outcome");

        double lam = local_slope_bound(cfg.f, M);
        double drive = eval_h(cfg.h, t) * lam;
        double dt_target = drive > 0.0 ? cfg.safety / drive : cfg.dt_init;
        if (dt_target < cfg.dt_min) {
            std::ostringstream os;
            os << "required dt " << dt_target << " fell below dt_min " << cfg.dt_min
               << " at t = " << t << " with sup " << M;
            throw StalledError(os.str());
        }
        double dt = std::min(cfg.dt_init, dt_target);
        dt = std::min(dt, cfg.horizon - t); // final partial step lands on the horizon

        u = step_core(u, t, dt, cfg, sym);
        t += dt;
        res.trace.push_back({t, u.sup_norm(), u.l1_mass(), dt});
    }

    if (res.status == RunStatus::BlowUp) {
        // extrapolate 1/sup through zero for the blow-up time estimate
        std::size_t count = std::min<std::size_t>(10, res.trace.size());
        std::vector<double> xs, ys;
        for (std::size_t i = res.trace.size() - count; i < res.trace.size(); ++i) {
            xs.push_back(res.trace[i].t);
            ys.push_back(1.0 / res.trace[i].sup);
        }
        res.blowup_fit = quad::fit_line(xs, ys);
        if (!(res.blowup_fit.slope < 0.0))
            throw InconsistencyError("blow-up certified but 1/sup is not decreasing");
        res.t_estimate = -res.blowup_fit.intercept / res.blowup_fit.slope;
        double t_last = res.trace.back().t;
        if (res.t_estimate < t_last * (1.0 - 1e-9))
            throw InconsistencyError("blow-up time estimate precedes the last computed time");
        res.t_estimate = std::max(res.t_estimate, t_last);
    }
    return res;
}

void PicardConfig::validate() const {
    grid.validate();
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw ValidationError("sigma must lie in (0, 1)");
    f.validate();
    h.validate();
    shape.validate();
    if (iterations < 1)
        throw ValidationError("need at least one iteration");
    if (t_samples.empty())
        throw ValidationError("need at least one time sample");
    for (std::size_t i = 0; i < t_samples.size(); ++i) {
        if (!(t_samples[i] > 0.0))
            throw ValidationError("time samples must be positive");
        if (i > 0 && !(t_samples[i] > t_samples[i - 1]))
            throw ValidationError("time samples must strictly increase");
    }
    if ((h.family == HFamily::PowerT && h.r < 0.0) ||
        (h.family == HFamily::PowerSumT && h.s < 0.0))
        throw ValidationError("weight must be finite at t = 0 for the fixed-point run");
}

PicardResult picard_iterate(const PicardConfig& cfg) {
    cfg.validate();
    const std::size_t S = cfg.t_samples.size();
    const std::size_t total = cfg.grid.total_points();
    if (S * total > std::size_t(1) << 27)
        throw CapacityError("sample grid times field size exceeds the memory budget");

    GridField phi = make_initial_data(cfg.grid, cfg.shape);
    if (phi.min_value() < -1e-9 * phi.sup_norm())
        throw DomainError("shape must be nonnegative");

    CriterionProblem prob;
    prob.d = cfg.grid.d;
    prob.sigma = cfg.sigma;
    prob.f = cfg.f;
    prob.h = cfg.h;
    prob.epsilon = 1.0;

    double T = cfg.t_samples.back();
    double t_K = std::max(T, 100.0);
    OrbitIntegralReport orbit = orbit_criterion_integral(phi, prob, t_K, 8);
    if (orbit.verdict != Verdict::Converges || !std::isfinite(orbit.total))
        throw HypothesisError("orbit integral of the shape diverges; no contraction scale exists");

    PicardResult res;
    res.K = orbit.total;
    res.t_samples = cfg.t_samples;

    auto shape_curve = supnorm_decay_curve(phi, cfg.sigma, cfg.t_samples);
    double maxN = phi.sup_norm();
    for (const auto& pt : shape_curve)
        maxN = std::max(maxN, pt.sup);

    double mu = 1.0;
    for (;;) {
        double root = std::sqrt(mu);
        bool small_data = root * maxN < 1.0;
        bool contraction = majorant_numeric(cfg.f, root * (1.0 + res.K), 512) <= root;
        if (small_data && contraction)
            break;
        mu *= 0.5;
        if (mu < 1e-300)
            throw HypothesisError("no admissible contraction scale above the underflow floor");
    }
    res.mu = mu;
    double scale = std::sqrt(mu);

    SpectralSymbol sym = build_symbol(cfg.grid, cfg.sigma);
    auto& ws = TransformWorkspace::local(cfg.grid);
    double inv_n = 1.0 / double(total);

    GridField seed(cfg.grid);
    for (std::size_t i = 0; i < total; ++i)
        seed.values[i] = scale * phi.values[i];

    // linear flow of the scaled shape at every sample
    std::vector<GridField> y0(S), y_prev(S), y_cur(S);
    {
        std::vector<std::complex<double>> base, spec;
        ws.forward(seed.values, base);
        for (std::size_t i = 0; i < S; ++i) {
            spec = base;
            for (std::size_t b = 0; b < spec.size(); ++b)
                spec[b] *= std::exp(-cfg.t_samples[i] * sym.values[b]);
            y0[i] = GridField(cfg.grid);
            ws.backward(spec, y0[i].values);
            for (double& x : y0[i].values)
                x *= inv_n;
        }
    }
    y_prev = y0;

    res.sup_curves.resize(std::size_t(cfg.iterations) + 1);
    for (std::size_t i = 0; i < S; ++i)
        res.sup_curves[0].push_back(y0[i].sup_norm());

    // nodes of the Duhamel quadrature: s = 0 plus the sample times; the
    // iterate at s = 0 is always the seed itself
    std::vector<double> nodes(S + 1);
    nodes[0] = 0.0;
    for (std::size_t i = 0; i < S; ++i)
        nodes[i + 1] = cfg.t_samples[i];

    std::vector<std::vector<std::complex<double>>> F(S + 1);
    std::vector<double> kick(total);
    std::vector<std::complex<double>> acc;
    std::vector<double> tail(total);

    for (int j = 1; j <= cfg.iterations; ++j) {
        // forcing spectra at every node for the previous iterate
        for (std::size_t k = 0; k <= S; ++k) {
            const GridField& yk = (k == 0) ? seed : y_prev[k - 1];
            double hk = eval_h(cfg.h, nodes[k]);
            for (std::size_t i = 0; i < total; ++i)
                kick[i] = hk * eval_f(cfg.f, std::max(yk.values[i], 0.0));
            ws.forward(kick, F[k]);
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            double ti = cfg.t_samples[i];
            std::size_t last = i + 1; // node index of t_i
            acc.assign(total, {0.0, 0.0});
            for (std::size_t k = 0; k <= last; ++k) {
                double w;
                if (k == 0)
                    w = 0.5 * (nodes[1] - nodes[0]);
                else if (k == last)
                    w = 0.5 * (nodes[last] - nodes[last - 1]);
                else
                    w = 0.5 * (nodes[k + 1] - nodes[k - 1]);
                double lag = ti - nodes[k];
                for (std::size_t b = 0; b < total; ++b)
                    acc[b] += w * std::exp(-lag * sym.values[b]) * F[k][b];
            }
            ws.backward(acc, tail);
            y_cur[i] = GridField(cfg.grid);
            double dmax = 0.0;
            for (std::size_t b = 0; b < total; ++b) {
                double val = y0[i].values[b] + tail[b] * inv_n;
                y_cur[i].values[b] = val;
                dmax = std::max(dmax, std::abs(val - y_prev[i].values[b]));
            }
            diff = std::max(diff, dmax);
            res.sup_curves[std::size_t(j)].push_back(y_cur[i].sup_norm());
        }
        res.diff_sup.push_back(diff);
        std::swap(y_prev, y_cur);
    }

    res.monotone = true;
    for (std::size_t j = 1; j < res.diff_sup.size(); ++j)
        if (res.diff_sup[j] > res.diff_sup[j - 1] * (1.0 + 1e-10))
            res.monotone = false;

    res.bound_satisfied = true;
    const auto& last_row = res.sup_curves.back();
    for (std::size_t i = 0; i < S; ++i) {
        double cap = (1.0 + res.K) * res.sup_curves[0][i];
        if (last_row[i] > cap * (1.0 + 1e-8) + 1e-300)
            res.bound_satisfied = false;
    }
    return res;
}

} // namespace mlnk
