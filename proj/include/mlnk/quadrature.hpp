#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mlnk::quad {

// Gauss-Legendre rules on [-1,1], stored as the positive half (symmetric).
inline constexpr std::array<std::array<double, 2>, 8> kGauss16 = {{
    {0.09501250983763744, 0.1894506104550685},
    {0.28160355077925891, 0.18260341504492359},
    {0.45801677765722739, 0.16915651939500254},
    {0.61787624440264375, 0.14959598881657673},
    {0.75540440835500303, 0.12462897125553387},
    {0.86563120238783174, 0.095158511682492785},
    {0.94457502307323258, 0.062253523938647893},
    {0.98940093499164993, 0.027152459411754095},
}};

inline constexpr std::array<std::array<double, 2>, 16> kGauss32 = {{
    {0.048307665687738316, 0.096540088514727801},
    {0.14447196158279649, 0.095638720079274859},
    {0.23928736225213707, 0.093844399080804566},
    {0.33186860228212765, 0.091173878695763885},
    {0.42135127613063535, 0.087652093004403811},
    {0.50689990893222939, 0.083311924226946755},
    {0.58771575724076233, 0.078193895787070306},
    {0.6630442669302152, 0.072345794108848506},
    {0.73218211874028968, 0.065822222776361847},
    {0.79448379596794241, 0.058684093478535547},
    {0.84936761373256997, 0.050998059262376176},
    {0.89632115576605212, 0.042835898022226681},
    {0.93490607593773969, 0.034273862913021433},
    {0.96476225558750643, 0.025392065309262059},
    {0.98561151154526834, 0.016274394730905671},
    {0.99726386184948156, 0.0070186100094700966},
}};

// Nodes and weights mapped to [a,b]. order must be 16 or 32.
void gauss_nodes(double a, double b, int order,
                 std::vector<double>& nodes, std::vector<double>& weights);

template <class F>
double gauss(double a, double b, int order, F&& f) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    auto add = [&](auto& rule) {
        for (auto [x, w] : rule)
            acc += w * (f(mid + half * x) + f(mid - half * x));
    };
    if (order == 32)
        add(kGauss32);
    else
        add(kGauss16);
    return half * acc;
}

// log( integral of exp(logf) over [a,b] ) computed without leaving log
// space, so the integrand may over/underflow double range pointwise.
double gauss_log(double a, double b, int order,
                 const std::function<double(double)>& logf);

double logsumexp(std::span<const double> v);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

// Ordinary least squares y ~ slope*x + intercept. Throws FitError when
// fewer than two distinct x values are given.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace mlnk::quad
