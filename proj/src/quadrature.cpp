#include "mlnk/quadrature.hpp"
#include "mlnk/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mlnk::quad {

void gauss_nodes(double a, double b, int order,
                 std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.clear();
    weights.clear();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto emit = [&](auto& rule) {
        for (auto [x, w] : rule) {
            nodes.push_back(mid - half * x);
            weights.push_back(half * w);
            nodes.push_back(mid + half * x);
            weights.push_back(half * w);
        }
    };
    if (order == 32)
        emit(kGauss32);
    else if (order == 16)
        emit(kGauss16);
    else
        throw ValidationError("quadrature order must be 16 or 32");
}

double logsumexp(std::span<const double> v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v)
        m = std::max(m, x);
    if (!std::isfinite(m))
        return m; // all -inf (empty sum) or a +inf term dominates
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s);
}

double gauss_log(double a, double b, int order,
                 const std::function<double(double)>& logf) {
    std::vector<double> nodes, weights;
    gauss_nodes(a, b, order, nodes, weights);
    std::vector<double> terms(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i)
        terms[i] = std::log(weights[i]) + logf(nodes[i]);
    return logsumexp(terms);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError("fit_line: size mismatch");
    size_t n = x.size();
    if (n < 2)
        throw FitError("fit_line: need at least two points");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw FitError("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double r2 = 0;
    for (size_t i = 0; i < n; ++i) {
        double e = y[i] - (f.slope * x[i] + f.intercept);
        r2 += e * e;
    }
    f.residual_rms = std::sqrt(r2 / double(n));
    return f;
}

} // namespace mlnk::quad
