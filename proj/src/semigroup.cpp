#include "mlnk/semigroup.hpp"
#include "mlnk/errors.hpp"
#include "mlnk/kernel.hpp"
#include "mlnk/spectral.hpp"

#include <cmath>
#include <complex>

namespace mlnk {

GridField apply_semigroup(const GridField& u, double sigma, double t) {
    if (!(t >= 0.0))
        throw DomainError("apply_semigroup needs t >= 0");
    if (t == 0.0)
        return u;
    SpectralSymbol sym = build_symbol(u.grid, sigma);
    auto& ws = TransformWorkspace::local(u.grid);
    std::vector<std::complex<double>> spec;
    ws.forward(u.values, spec);
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] *= std::exp(-t * sym.values[i]);
    GridField out(u.grid);
    ws.backward(spec, out.values);
    double inv = 1.0 / double(u.grid.total_points());
    for (double& v : out.values)
        v *= inv;
    return out;
}

std::vector<DecayPoint> supnorm_decay_curve(const GridField& u0, double sigma,
                                            const std::vector<double>& times) {
    if (times.empty())
        throw ValidationError("decay curve needs at least one time");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0))
            throw DomainError("decay curve times must be positive");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ValidationError("decay curve times must strictly increase");
    }
    double sup0 = u0.sup_norm();
    if (sup0 == 0.0)
        throw DomainError("decay curve needs a nonzero field");
    if (u0.min_value() < -1e-9 * sup0)
        throw DomainError("decay curve needs a nonnegative field");
    require_containment(u0.grid, times.back());

    SpectralSymbol sym = build_symbol(u0.grid, sigma);
    auto& ws = TransformWorkspace::local(u0.grid);
    std::vector<std::complex<double>> base, spec;
    ws.forward(u0.values, base);
    double inv = 1.0 / double(u0.grid.total_points());
    double vol = u0.grid.cell_volume();

    std::vector<DecayPoint> out;
    std::vector<double> work;
    for (double t : times) {
        spec = base;
        for (std::size_t i = 0; i < spec.size(); ++i)
            spec[i] *= std::exp(-t * sym.values[i]);
        ws.backward(spec, work);
        DecayPoint p;
        p.t = t;
        double sup = 0.0, mass = 0.0;
        for (double v : work) {
            double x = v * inv;
            sup = std::max(sup, std::abs(x));
            mass += std::abs(x);
        }
        p.sup = sup;
        p.mass = mass * vol;
        out.push_back(p);
    }
    return out;
}

quad::LinearFit fit_decay_exponent(const std::vector<DecayPoint>& curve,
                                   double t_lo, double t_hi) {
    std::vector<double> lx, ly;
    for (const auto& p : curve) {
        if (p.t >= t_lo && p.t <= t_hi && p.sup > 0.0) {
            lx.push_back(std::log(p.t));
            ly.push_back(std::log(p.sup));
        }
    }
    if (lx.size() < 5)
        throw FitError("decay fit needs at least five points in the window");
    return quad::fit_line(lx, ly);
}

} // namespace mlnk
