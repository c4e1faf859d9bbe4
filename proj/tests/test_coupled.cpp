#include "support.hpp"

#include "tecell/coupled.hpp"
#include "tecell/errors.hpp"
#include "tecell/oracle.hpp"

#include <catch_amalgamated.hpp>

using namespace tecell;
using namespace tecell::testing;
using Catch::Approx;

namespace {

SolverSettings quick_settings(double eps)
{
    SolverSettings s;
    s.dt = 0.1;
    s.horizon = 0.5;
    s.eps = eps;
    return s;
}

}  // namespace

TEST_CASE("equilibrium run stays at ambient with the horizon marker")
{
    const Mesh mesh = small_mesh(12);
    const PhysicalParams p = make_params(mesh, UniformData{});
    const ButlerVolmerContext ctx(mesh, p, 1.0);
    SolverSettings s = quick_settings(1.0);
    s.horizon = 1.0;
    const SimulationResult r = run_simulation(mesh, p, ctx, s);
    REQUIRE(r.completed);
    REQUIRE(r.times.size() == 11);
    for (const auto& u : r.temperatures)
        for (double v : u.values)
            CHECK(v == p.T_a);
    for (std::size_t n = 1; n < r.diagnostics.size(); ++n)
        CHECK(r.diagnostics[n].picard_iters == 1);
    CHECK(r.t_star.horizon);
}

TEST_CASE("step map matches the monolithic oracle")
{
    Problem pr = random_problem(small_mesh(8), 41);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    const CoupledSolver solver(pr.mesh, pr.params, ctx, quick_settings(1.0));
    const TemperatureField prev{pr.params.u0, 0.0};
    const StepMapOutput out = solver.apply_J(pr.u, prev, 0.1);
    const OracleStep ref = oracle_step(pr.mesh, pr.u, pr.params.u0, 0.0, 0.1, 0.0, 1.0, ctx, pr.params);
    CHECK(max_abs_diff(out.u.values, ref.u) < 1e-8);
    CHECK(max_abs_diff(out.source, ref.source) < 1e-8);
}

TEST_CASE("step map sees the temperature only through the clamp")
{
    Problem pr = random_problem(small_mesh(12), 42);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.2);
    const CoupledSolver solver(pr.mesh, pr.params, ctx, quick_settings(0.2));
    const TemperatureField prev{pr.params.u0, 0.0};
    std::vector<double> v1(pr.params.u0), v2(pr.params.u0);
    for (std::size_t c = 0; c < v1.size(); ++c) {
        v1[c] += 0.5;
        v2[c] += 3.0;
    }
    const StepMapOutput a = solver.apply_J(v1, prev, 0.1);
    const StepMapOutput b = solver.apply_J(v2, prev, 0.1);
    CHECK(max_abs_diff(a.u.values, b.u.values) <= 1e-12);
}

TEST_CASE("Picard step converges geometrically and certifies its fixed point")
{
    Problem pr = random_problem(small_mesh(12), 43, 0.2);
    for (auto& v : pr.params.U)
        v = 0.0;
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    const SolverSettings s = quick_settings(1.0);
    const CoupledSolver solver(pr.mesh, pr.params, ctx, s);
    const TemperatureField prev{pr.params.u0, 0.0};
    const PicardOutcome out = solver.picard_step(prev, 0.1);
    REQUIRE(out.history.size() >= 3);
    for (std::size_t k = 2; k < out.history.size(); ++k)
        CHECK(out.history[k] < out.history[k - 1]);
    const StepMapOutput again = solver.apply_J(out.u.values, prev, 0.1);
    CHECK(max_abs_diff(again.u.values, out.u.values) <= 2.0 * s.picard_tol);
}

TEST_CASE("Picard failure carries the residual history")
{
    Problem pr = random_problem(small_mesh(12), 44);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    SolverSettings s = quick_settings(1.0);
    s.picard_max_iters = 2;
    s.picard_tol = 1e-15;
    const CoupledSolver solver(pr.mesh, pr.params, ctx, s);
    try {
        solver.picard_step({pr.params.u0, 0.0}, 0.1);
        FAIL("expected a Picard failure");
    } catch (const SolverError& e) {
        CHECK(e.stage() == SolverStage::Picard);
        CHECK(e.trace().size() == 2);
    }
}

TEST_CASE("halving the step gives a second-order per-step difference")
{
    Problem pr = random_problem(small_mesh(12), 45, 0.3);
    // smooth start: rough per-cell data keeps the fast diffusion modes out of the asymptotic range
    pr.params.u0.assign(pr.params.u0.size(), 2.1);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    SolverSettings s = quick_settings(1.0);
    s.picard_tol = 1e-12;
    const CoupledSolver solver(pr.mesh, pr.params, ctx, s);
    const TemperatureField prev{pr.params.u0, 0.0};
    std::vector<double> gaps;
    for (double dt : {0.004, 0.002, 0.001}) {
        const PicardOutcome full = solver.picard_step(prev, dt);
        const PicardOutcome half1 = solver.picard_step(prev, 0.5 * dt);
        const PicardOutcome half2 = solver.picard_step(half1.u, 0.5 * dt);
        gaps.push_back(max_abs_diff(full.u.values, half2.u.values));
    }
    INFO(gaps[0] << ' ' << gaps[1] << ' ' << gaps[2]);
    CHECK(gaps[1] / gaps[2] == Approx(4.0).margin(0.6));
}

TEST_CASE("whole-trajectory mode agrees with the per-step march")
{
    Problem pr = random_problem(small_mesh(8), 46, 0.3);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    SolverSettings s = quick_settings(1.0);
    s.horizon = 0.3;
    s.picard_tol = 1e-11;
    const SimulationResult a = run_simulation(pr.mesh, pr.params, ctx, s);
    s.outer_mode = OuterMode::Trajectory;
    const SimulationResult b = run_simulation(pr.mesh, pr.params, ctx, s);
    REQUIRE(a.completed);
    REQUIRE(b.completed);
    REQUIRE(a.temperatures.size() == b.temperatures.size());
    for (std::size_t n = 0; n < a.temperatures.size(); ++n)
        CHECK(max_abs_diff(a.temperatures[n].values, b.temperatures[n].values) < 1e-9);
}

TEST_CASE("continuation tau mode approaches the constrained limit")
{
    Problem pr = random_problem(small_mesh(12), 47);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 1.0);
    SolverSettings s = quick_settings(1.0);
    const CoupledSolver limit(pr.mesh, pr.params, ctx, s);
    s.tau_mode = TauMode::Continuation;
    const CoupledSolver cont(pr.mesh, pr.params, ctx, s);
    const PotentialPair a = limit.solve_potentials(pr.u, 0.0);
    const PotentialPair b = cont.solve_potentials(pr.u, 0.0);
    CHECK(max_abs_diff(stack(a), stack(b)) < 1e-6);
}

TEST_CASE("detect_tstar reports the last step inside the band")
{
    const Mesh mesh = small_mesh(8);
    const std::vector<double> u0(mesh.num_cells(), 2.0);
    SimulationResult r;
    for (int n = 0; n <= 10; ++n) {
        r.times.push_back(0.1 * n);
        r.temperatures.push_back({std::vector<double>(mesh.num_cells(), 2.0 + 0.1 * n), 0.1 * n});
    }
    const TStar t = detect_tstar(r, u0, 0.65);
    CHECK_FALSE(t.horizon);
    CHECK(t.time == Approx(0.6));
    CHECK(detect_tstar(r, u0, 5.0).horizon);
}

TEST_CASE("settings validation rejects out-of-range values")
{
    SolverSettings s;
    s.dt = -1.0;
    CHECK_THROWS_WITH(s.validate(2.0), "solver.dt must be positive");
    s = SolverSettings{};
    s.picard_relaxation = 1.5;
    CHECK_THROWS_AS(s.validate(2.0), ConfigError);
    s = SolverSettings{};
    s.eps = 2.0;
    CHECK_THROWS_AS(s.validate(2.0), ConfigError);
}

TEST_CASE("bisection refines T* inside the first step that leaves the band")
{
    const Mesh mesh = small_mesh(8);
    UniformData d;
    d.k1 = 0.0;
    d.I_a = 3.0;
    d.I_c = -3.0;
    d.sigma_s = {0.3, 0.3};
    const PhysicalParams p = make_params(mesh, d);
    const ButlerVolmerContext ctx(mesh, p, 0.3);
    SolverSettings s = quick_settings(0.3);
    s.horizon = 2.0;
    s.tstar_refinement = TStarRefinement::Bisection;
    s.bisection_iters = 20;
    const SimulationResult r = run_simulation(mesh, p, ctx, s);
    REQUIRE(r.completed);
    REQUIRE_FALSE(r.t_star_step.horizon);
    CHECK(r.t_star.time >= r.t_star_step.time);
    CHECK(r.t_star.time <= r.t_star_step.time + s.dt);
}
