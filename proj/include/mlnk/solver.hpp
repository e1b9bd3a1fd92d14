#pragma once

#include "mlnk/criterion.hpp"
#include "mlnk/grid.hpp"
#include "mlnk/nonlinearity.hpp"
#include "mlnk/quadrature.hpp"

#include <array>
#include <string>
#include <vector>

namespace mlnk {

struct InitialDataSpec {
    enum class Kind { Gaussian, Plateau, FromFile };
    Kind kind = Kind::Gaussian;
    double amplitude = 1.0;
    double width = 1.0;
    std::array<double, 3> center = {0.0, 0.0, 0.0};
    std::string path; // FromFile

    void validate() const;
};

GridField make_initial_data(const GridSpec& grid, const InitialDataSpec& spec);

struct EvolutionConfig {
    GridSpec grid;
    double sigma = 0.5;
    NonlinearitySpec f;
    TimeWeightSpec h;
    InitialDataSpec u0;
    double horizon = 1.0;
    double dt_init = 0.01;
    double dt_min = 1e-18;
    double safety = 0.9;
    double blowup_threshold = 1e8;
    double decay_fraction = 1e-2;

    void validate() const;
};

// max slope of f over [0, M], read off 128 uniform intervals
double local_slope_bound(const NonlinearitySpec& f, double M);

// one step of the exponential Euler scheme: nonlinear kick, then the exact
// linear flow over dt. Negative undershoots from spectral ringing are
// clamped to zero inside f.
GridField step_exponential_euler(const GridField& u, double t, double dt,
                                 const EvolutionConfig& cfg);

enum class RunStatus { Decayed, BlowUp, HorizonReached };

const char* run_status_name(RunStatus s);

struct TraceSample {
    double t = 0.0;
    double sup = 0.0;
    double mass = 0.0;
    double dt_used = 0.0;
};

struct EvolutionResult {
    RunStatus status = RunStatus::HorizonReached;
    std::vector<TraceSample> trace;
    double t_estimate = 0.0;       // BlowUp only: root of the 1/sup fit
    quad::LinearFit blowup_fit;    // fit of 1/sup on the last samples
};

// Adaptive evolution: dt = safety / (h(t) * slope bound), clipped to
// [dt_min, dt_init]. Stops when sup crosses blowup_threshold (BlowUp),
// when sup falls below decay_fraction * sup(0) with a monotone tail
// (Decayed), or at the horizon. Hitting dt_min early raises StalledError.
EvolutionResult evolve(const EvolutionConfig& cfg);

struct PicardConfig {
    GridSpec grid;
    double sigma = 0.5;
    NonlinearitySpec f;
    TimeWeightSpec h;
    InitialDataSpec shape; // the profile phi; the run scales it by sqrt(mu)
    int iterations = 4;
    std::vector<double> t_samples;

    void validate() const;
};

struct PicardResult {
    double K = 0.0;       // orbit integral of the shape, all of time
    double mu = 1.0;      // contraction scale chosen by halving
    std::vector<double> t_samples;
    // sup norm of each iterate at each sample; row 0 is the linear flow
    std::vector<std::vector<double>> sup_curves;
    std::vector<double> diff_sup; // max_i sup |y_j - y_(j-1)| per iteration
    bool monotone = false;        // diffs decrease
    bool bound_satisfied = false; // y_J <= (1 + K) y_0 pointwise in sup norm
};

// Runs the fixed-point iteration behind the mild solution: y_0 is the
// linear flow of sqrt(mu) * phi, and each pass adds the integrated
// nonlinear term on the sample grid. Requires the orbit integral of the
// shape to converge; mu is halved until sqrt(mu) max_t N < 1 and
// f_M(sqrt(mu) (1 + K)) <= sqrt(mu).
PicardResult picard_iterate(const PicardConfig& cfg);

} // namespace mlnk
