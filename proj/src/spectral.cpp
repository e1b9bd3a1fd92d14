#include "mlnk/spectral.hpp"
#include "mlnk/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

namespace mlnk {

namespace {
// FFTW's planner is not thread safe; execution of a built plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

double SpectralSymbol::value_at(const std::array<int, 3>& k_signed) const {
    double xi2 = 0.0;
    for (int a = 0; a < grid.d; ++a) {
        double xi = std::numbers::pi * double(k_signed[a]) / grid.L;
        xi2 += xi * xi;
    }
    return xi2 + std::pow(xi2, sigma);
}

SpectralSymbol build_symbol(const GridSpec& grid, double sigma) {
    grid.validate();
    if (!(sigma > 0.0) || !(sigma < 1.0))
        throw ValidationError("sigma must lie in (0, 1)");
    SpectralSymbol s;
    s.grid = grid;
    s.sigma = sigma;
    s.values.resize(grid.total_points());
    const int n = grid.n;
    // |xi|^2 accumulated axis by axis, then the fractional part from the
    // rotational-invariant modulus
    for (std::size_t idx = 0; idx < s.values.size(); ++idx) {
        auto j = grid.unflatten(idx);
        double xi2 = 0.0;
        for (int a = 0; a < grid.d; ++a) {
            int ks = j[a] < n / 2 ? j[a] : j[a] - n;
            double xi = std::numbers::pi * double(ks) / grid.L;
            xi2 += xi * xi;
        }
        s.values[idx] = xi2 + std::pow(xi2, sigma);
    }
    return s;
}

std::vector<double> symbol_multiplier(const SpectralSymbol& s, double t) {
    if (!(t >= 0.0))
        throw DomainError("multiplier needs t >= 0");
    std::vector<double> out(s.values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::exp(-t * s.values[i]);
    return out;
}

TransformWorkspace::TransformWorkspace(const GridSpec& grid) : grid_(grid) {
    grid.validate();
    std::size_t total = grid.total_points();
    buf_ = fftw_malloc(sizeof(fftw_complex) * total);
    if (!buf_)
        throw CapacityError("fftw buffer allocation failed");
    int dims[3] = {grid.n, grid.n, grid.n};
    auto* b = static_cast<fftw_complex*>(buf_);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft(grid.d, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft(grid.d, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_)
        throw Error("fftw plan creation failed");
}

TransformWorkspace::~TransformWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_);
}

void TransformWorkspace::forward(const std::vector<double>& in,
                                 std::vector<std::complex<double>>& out) {
    std::size_t total = grid_.total_points();
    if (in.size() != total)
        throw ValidationError("forward: field size does not match grid");
    auto* b = static_cast<fftw_complex*>(buf_);
    for (std::size_t i = 0; i < total; ++i) {
        b[i][0] = in[i];
        b[i][1] = 0.0;
    }
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        out[i] = {b[i][0], b[i][1]};
}

void TransformWorkspace::backward(const std::vector<std::complex<double>>& in,
                                  std::vector<double>& out) {
    std::size_t total = grid_.total_points();
    if (in.size() != total)
        throw ValidationError("backward: spectrum size does not match grid");
    auto* b = static_cast<fftw_complex*>(buf_);
    for (std::size_t i = 0; i < total; ++i) {
        b[i][0] = in[i].real();
        b[i][1] = in[i].imag();
    }
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        out[i] = b[i][0];
}

TransformWorkspace& TransformWorkspace::local(const GridSpec& grid) {
    thread_local std::map<std::tuple<int, int, double>, std::unique_ptr<TransformWorkspace>> cache;
    auto key = std::make_tuple(grid.d, grid.n, grid.L);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<TransformWorkspace>(grid)).first;
    return *it->second;
}

} // namespace mlnk
