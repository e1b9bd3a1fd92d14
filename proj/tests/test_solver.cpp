#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlnk/errors.hpp"
#include "mlnk/semigroup.hpp"
#include "mlnk/solver.hpp"

#include <cmath>

using namespace mlnk;

namespace {

EvolutionConfig base_config(const GridSpec& g) {
    EvolutionConfig cfg;
    cfg.grid = g;
    cfg.sigma = 0.5;
    cfg.f = NonlinearitySpec::power(3.0);
    cfg.h = TimeWeightSpec::constant(1.0);
    cfg.u0.kind = InitialDataSpec::Kind::Gaussian;
    cfg.u0.amplitude = 10.0;
    cfg.u0.width = 1.0;
    cfg.horizon = 1.0;
    cfg.dt_init = 0.01;
    return cfg;
}

} // namespace

TEST_CASE("initial data profiles place their peak where asked") {
    GridSpec g{1, 256, 10.0};
    InitialDataSpec spec;
    spec.amplitude = 2.0;
    spec.width = 1.0;
    spec.center = {3.0, 0.0, 0.0};
    GridField u = make_initial_data(g, spec);
    CHECK(u.sup_norm() == doctest::Approx(2.0).epsilon(1e-2));
    std::size_t arg = 0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.values[i] > u.values[arg])
            arg = i;
    CHECK(std::abs(g.coord(int(arg)) - 3.0) <= g.dx());

    spec.kind = InitialDataSpec::Kind::Plateau;
    spec.center = {0.0, 0.0, 0.0};
    GridField v = make_initial_data(g, spec);
    // the plateau is flat near its center and drops to A/e at r = width
    CHECK(v.values[std::size_t(g.n / 2)] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(v.sup_norm() == doctest::Approx(2.0).epsilon(1e-9));

    spec.amplitude = -1.0;
    CHECK_THROWS_AS(make_initial_data(g, spec), ValidationError);
}

TEST_CASE("local slope bound tracks the steepest chord") {
    CHECK(local_slope_bound(NonlinearitySpec::power(2.0), 4.0) ==
          doctest::Approx(8.0).epsilon(0.01));
    CHECK(local_slope_bound(NonlinearitySpec::power(3.0), 1.0) ==
          doctest::Approx(3.0).epsilon(0.02));
    CHECK(local_slope_bound(NonlinearitySpec::power(2.0), 0.0) == 0.0);
    CHECK_THROWS_AS(local_slope_bound(NonlinearitySpec::power(2.0), -1.0), DomainError);
}

TEST_CASE("a single step with zero weight is the pure linear flow") {
    GridSpec g{1, 1024, 100.0};
    EvolutionConfig cfg = base_config(g);
    cfg.h = TimeWeightSpec::constant(0.0);
    InitialDataSpec spec;
    spec.amplitude = 1.0;
    spec.width = 2.0;
    GridField u = make_initial_data(g, spec);
    GridField stepped = step_exponential_euler(u, 0.0, 0.5, cfg);
    GridField flowed = apply_semigroup(u, cfg.sigma, 0.5);
    for (std::size_t i = 0; i < u.values.size(); ++i)
        CHECK(stepped.values[i] == doctest::Approx(flowed.values[i]).epsilon(1e-12));
    CHECK_THROWS_AS(step_exponential_euler(u, 0.0, 0.0, cfg), DomainError);
}

TEST_CASE("strong data above the threshold blows up in finite time") {
    GridSpec g{1, 4096, 40.0};
    EvolutionConfig cfg = base_config(g);
    EvolutionResult res = evolve(cfg);
    CHECK(res.status == RunStatus::BlowUp);
    CHECK(res.trace.back().sup > cfg.blowup_threshold);
    CHECK(res.t_estimate > 0.001);
    CHECK(res.t_estimate < 0.5);
    CHECK(res.t_estimate >= res.trace.back().t);
    CHECK(res.trace.size() > 20);
    CHECK(res.trace.size() < 2000);
    // the controller shrinks the step as the peak sharpens
    CHECK(res.trace.back().dt_used < res.trace[1].dt_used);
}

TEST_CASE("small data decays past the certification fraction") {
    GridSpec g{1, 32768, 2048.0};
    EvolutionConfig cfg = base_config(g);
    cfg.f = NonlinearitySpec::power(2.0);
    cfg.u0.amplitude = 0.01;
    cfg.horizon = 3e4;
    cfg.dt_init = 0.25;
    cfg.decay_fraction = 0.1;
    EvolutionResult res = evolve(cfg);
    CHECK(res.status == RunStatus::Decayed);
    CHECK(res.trace.back().sup < 0.1 * res.trace.front().sup);
    CHECK(res.trace.back().t < 100.0);
}

TEST_CASE("a short horizon returns control at the horizon") {
    GridSpec g{1, 1024, 100.0};
    EvolutionConfig cfg = base_config(g);
    cfg.u0.amplitude = 0.01;
    cfg.f = NonlinearitySpec::power(2.0);
    cfg.horizon = 0.5;
    cfg.dt_init = 0.05;
    EvolutionResult res = evolve(cfg);
    CHECK(res.status == RunStatus::HorizonReached);
    CHECK(res.trace.back().t == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("an impossible step budget stalls with a diagnosis") {
    GridSpec g{1, 256, 40.0};
    EvolutionConfig cfg = base_config(g);
    cfg.u0.amplitude = 1.0;
    cfg.safety = 1e-6;
    cfg.dt_min = 0.01;
    cfg.dt_init = 0.1;
    CHECK_THROWS_AS(evolve(cfg), StalledError);
}

TEST_CASE("evolution config validation rejects bad settings") {
    GridSpec g{1, 256, 40.0};
    EvolutionConfig cfg = base_config(g);
    cfg.decay_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = base_config(g);
    cfg.safety = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = base_config(g);
    cfg.dt_min = 1.0;
    cfg.dt_init = 0.01;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = base_config(g);
    cfg.sigma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("fixed-point iteration contracts for small scaled data") {
    PicardConfig pc;
    pc.grid = GridSpec{1, 8192, 1000.0};
    pc.sigma = 0.5;
    pc.f = NonlinearitySpec::power(3.0);
    pc.h = TimeWeightSpec::constant(1.0);
    pc.shape.amplitude = 0.05;
    pc.shape.width = 1.0;
    pc.iterations = 4;
    for (int i = 1; i <= 20; ++i)
        pc.t_samples.push_back(double(i));

    PicardResult res = picard_iterate(pc);
    CHECK(res.mu == 0.5);
    CHECK(res.K > 1e-4);
    CHECK(res.K < 1e-2);
    REQUIRE(res.sup_curves.size() == 5);
    for (const auto& row : res.sup_curves)
        CHECK(row.size() == 20);
    REQUIRE(res.diff_sup.size() == 4);
    CHECK(res.monotone);
    CHECK(res.bound_satisfied);
    // each pass multiplies the defect by roughly the orbit constant
    CHECK(res.diff_sup.back() < 1e-3 * res.diff_sup.front());
    CHECK(res.diff_sup.back() < 1e-8);
}

TEST_CASE("fixed-point iteration refuses a divergent orbit") {
    PicardConfig pc;
    pc.grid = GridSpec{1, 2048, 1000.0};
    pc.sigma = 0.5;
    pc.f = NonlinearitySpec::power(1.5);
    pc.h = TimeWeightSpec::constant(1.0);
    pc.shape.amplitude = 0.05;
    pc.shape.width = 1.0;
    pc.iterations = 2;
    pc.t_samples = {1.0, 2.0};
    CHECK_THROWS_AS(picard_iterate(pc), HypothesisError);
}

TEST_CASE("fixed-point iteration enforces its memory budget") {
    PicardConfig pc;
    pc.grid = GridSpec{1, 1 << 24, 1000.0};
    pc.sigma = 0.5;
    pc.f = NonlinearitySpec::power(2.0);
    pc.h = TimeWeightSpec::constant(1.0);
    pc.shape.amplitude = 0.05;
    pc.shape.width = 1.0;
    pc.iterations = 1;
    for (int i = 1; i <= 9; ++i)
        pc.t_samples.push_back(double(i));
    CHECK_THROWS_AS(picard_iterate(pc), CapacityError);
}

TEST_CASE("fixed-point config rejects weights singular at zero") {
    PicardConfig pc;
    pc.grid = GridSpec{1, 2048, 1000.0};
    pc.f = NonlinearitySpec::power(2.0);
    pc.h = TimeWeightSpec::power_t(-0.5);
    pc.shape.amplitude = 0.05;
    pc.shape.width = 1.0;
    pc.iterations = 1;
    pc.t_samples = {1.0};
    CHECK_THROWS_AS(pc.validate(), ValidationError);
}
