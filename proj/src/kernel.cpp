#include "mlnk/kernel.hpp"
#include "mlnk/errors.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

namespace mlnk {

namespace {

int next_pow2(double x) {
    int n = 8;
    while (double(n) < x && n < (1 << 30))
        n *= 2;
    return n;
}

// parity phase (-1)^(k0+k1+...) that shifts the synthesis to x = -L + j dx
double corner_phase(const GridSpec& g, std::size_t idx) {
    auto j = g.unflatten(idx);
    int par = 0;
    for (int a = 0; a < g.d; ++a)
        par ^= (j[a] & 1);
    return par ? -1.0 : 1.0;
}

GridField synthesize(const GridSpec& grid, const std::vector<double>& spectrum_decay) {
    auto& ws = TransformWorkspace::local(grid);
    std::size_t total = grid.total_points();
    std::vector<std::complex<double>> spec(total);
    for (std::size_t i = 0; i < total; ++i)
        spec[i] = corner_phase(grid, i) * spectrum_decay[i];
    GridField out(grid);
    ws.backward(spec, out.values);
    double norm = 1.0;
    for (int a = 0; a < grid.d; ++a)
        norm *= 2.0 * grid.L;
    for (double& v : out.values)
        v /= norm;
    return out;
}

} // namespace

void require_spectral_resolution(const GridSpec& grid, double sigma, double t) {
    if (!(t > 0.0))
        throw DomainError("kernel synthesis needs t > 0");
    double xi_nyq = std::numbers::pi * double(grid.n / 2) / grid.L;
    double m_nyq = xi_nyq * xi_nyq + std::pow(xi_nyq * xi_nyq, sigma);
    double tail = std::exp(-t * m_nyq);
    if (!(tail < 1e-14)) {
        // need t * xi^2 >= ln(1e14); suggest the next power of two that gets there
        double xi_need = std::sqrt(std::log(1e14) / t);
        int n_need = next_pow2(2.0 * grid.L * xi_need / std::numbers::pi);
        std::ostringstream os;
        os << "spectral tail exp(-t m) = " << tail << " at the Nyquist frequency "
           << "(need < 1e-14) for t = " << t << "; increase n to at least "
           << n_need << " (or shrink L)";
        throw ResolutionError(os.str());
    }
}

void require_containment(const GridSpec& grid, double t) {
    if (!(t > 0.0))
        throw DomainError("containment check needs t > 0");
    double leak = std::exp(-grid.L * grid.L / (4.0 * t));
    if (!(leak < 1e-12)) {
        double L_need = std::ceil(10.52 * std::sqrt(t));
        std::ostringstream os;
        os << "Gaussian containment factor exp(-L^2/(4t)) = " << leak
           << " (need < 1e-12) for t = " << t << "; increase L to at least "
           << L_need << " and scale n with it to keep dx";
        throw ResolutionError(os.str());
    }
}

KernelSample kernel_from_symbol(const GridSpec& grid, double sigma, double t) {
    grid.validate();
    require_spectral_resolution(grid, sigma, t);
    require_containment(grid, t);
    SpectralSymbol sym = build_symbol(grid, sigma);
    KernelSample k;
    k.grid = grid;
    k.sigma = sigma;
    k.t = t;
    k.values = synthesize(grid, symbol_multiplier(sym, t));
    return k;
}

KernelSample kernel_convolution_form(const GridSpec& grid, double sigma, double t) {
    grid.validate();
    require_spectral_resolution(grid, sigma, t);
    require_containment(grid, t);

    // kernel of the fractional part alone, from its symbol |xi|^(2 sigma)
    std::size_t total = grid.total_points();
    std::vector<double> frac_decay(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto j = grid.unflatten(i);
        double xi2 = 0.0;
        for (int a = 0; a < grid.d; ++a) {
            int ks = j[a] < grid.n / 2 ? j[a] : j[a] - grid.n;
            double xi = std::numbers::pi * double(ks) / grid.L;
            xi2 += xi * xi;
        }
        frac_decay[i] = std::exp(-t * std::pow(xi2, sigma));
    }
    GridField frac = synthesize(grid, frac_decay);

    // sampled Gaussian factor
    GridField gauss(grid);
    double pref = std::pow(4.0 * std::numbers::pi * t, -0.5 * grid.d);
    for (std::size_t i = 0; i < total; ++i) {
        auto j = grid.unflatten(i);
        double r2 = 0.0;
        for (int a = 0; a < grid.d; ++a) {
            double x = grid.coord(j[a]);
            r2 += x * x;
        }
        gauss.values[i] = pref * std::exp(-r2 / (4.0 * t));
    }

    // periodic convolution via the convolution theorem; both factors are
    // sampled with x = 0 at index n/2, so the product picks up the parity
    // phase that shifts the result back to the same centering
    auto& ws = TransformWorkspace::local(grid);
    std::vector<std::complex<double>> fg, fh;
    ws.forward(gauss.values, fg);
    ws.forward(frac.values, fh);
    double scale = grid.cell_volume() / double(total);
    for (std::size_t i = 0; i < total; ++i)
        fg[i] *= fh[i] * scale * corner_phase(grid, i);
    KernelSample k;
    k.grid = grid;
    k.sigma = sigma;
    k.t = t;
    k.values = GridField(grid);
    ws.backward(fg, k.values.values);
    return k;
}

KernelCheck verify_density_properties(const KernelSample& k, double mass_tol,
                                      double positivity_floor, double symmetry_tol) {
    const GridSpec& g = k.grid;
    const auto& v = k.values.values;
    KernelCheck c;

    double mass = 0.0, mx = 0.0, mn = v.empty() ? 0.0 : v[0];
    for (double x : v) {
        mass += x;
        mx = std::max(mx, x);
        mn = std::min(mn, x);
    }
    mass *= g.cell_volume();
    c.mass_error = std::abs(mass - 1.0);
    c.max_value = mx;
    c.min_value = mn;

    double sym = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto j = g.unflatten(i);
        std::array<int, 3> jr = {0, 0, 0};
        for (int a = 0; a < g.d; ++a)
            jr[a] = (g.n - j[a]) % g.n;
        sym = std::max(sym, std::abs(v[i] - v[g.flatten(jr)]));
    }
    c.symmetry_error = sym;

    std::array<int, 3> corner = {0, 0, 0};
    c.boundary_value = v[g.flatten(corner)];

    c.mass_ok = c.mass_error <= mass_tol;
    c.positivity_ok = c.min_value >= positivity_floor;
    c.symmetry_ok = c.symmetry_error <= symmetry_tol;
    return c;
}

double verify_semigroup_property(const GridSpec& grid, double sigma, double t, double s) {
    if (!(t > 0.0) || !(s > 0.0))
        throw DomainError("semigroup check needs t > 0 and s > 0");
    KernelSample pt = kernel_from_symbol(grid, sigma, t);
    KernelSample ps = kernel_from_symbol(grid, sigma, s);
    KernelSample pts = kernel_from_symbol(grid, sigma, t + s);

    auto& ws = TransformWorkspace::local(grid);
    std::vector<std::complex<double>> ft, fs;
    ws.forward(pt.values.values, ft);
    ws.forward(ps.values.values, fs);
    std::size_t total = grid.total_points();
    double scale = grid.cell_volume() / double(total);
    // same centering phase as in the factored construction above
    for (std::size_t i = 0; i < total; ++i)
        ft[i] *= fs[i] * scale * corner_phase(grid, i);
    std::vector<double> conv;
    ws.backward(ft, conv);

    double dev = 0.0;
    for (std::size_t i = 0; i < total; ++i)
        dev = std::max(dev, std::abs(conv[i] - pts.values.values[i]));
    return dev;
}

ScalingBoundsReport verify_bounds(const GridSpec& grid, double sigma,
                                  const std::vector<double>& t_list) {
    if (t_list.empty())
        throw ValidationError("verify_bounds needs at least one time");
    for (std::size_t i = 0; i + 1 < t_list.size(); ++i)
        if (!(t_list[i] < t_list[i + 1]))
            throw ValidationError("verify_bounds times must increase");
    double t_max = t_list.back();
    if (std::sqrt(t_max) > grid.L) {
        std::ostringstream os;
        os << "sqrt(t) = " << std::sqrt(t_max) << " exceeds the box half-width L = "
           << grid.L << "; the requested window is outside what this box can certify";
        throw CoverageError(os.str());
    }

    ScalingBoundsReport rep;
    rep.beta = double(grid.d) / (2.0 * sigma);
    for (double t : t_list) {
        KernelSample k = kernel_from_symbol(grid, sigma, t);
        double sup = 0.0;
        for (double v : k.values.values)
            sup = std::max(sup, v);
        rep.times.push_back(t);
        rep.scaled_sup.push_back(std::pow(t, rep.beta) * sup);
    }
    rep.cstar = 0.0;
    for (double a : rep.scaled_sup)
        rep.cstar = std::max(rep.cstar, a);

    // scaled sup should be flat across a decade once t clears the
    // short-time transition; judge the floor on t > 1 only
    double lo_late = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        if (rep.times[i] > 1.0)
            lo_late = std::min(lo_late, rep.scaled_sup[i]);
    if (!std::isfinite(lo_late)) {
        double lo_all = std::numeric_limits<double>::infinity();
        for (double a : rep.scaled_sup)
            lo_all = std::min(lo_all, a);
        lo_late = lo_all;
    }
    rep.upper_ok = rep.cstar <= 10.0 * lo_late;
    rep.lower_ok = lo_late >= 1e-3 * rep.cstar;
    return rep;
}

} // namespace mlnk
