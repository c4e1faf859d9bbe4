#include "support.hpp"

#include "tecell/errors.hpp"
#include "tecell/oracle.hpp"

#include <catch_amalgamated.hpp>

using namespace tecell;
using namespace tecell::testing;
using Catch::Approx;

TEST_CASE("zero data gives zero potentials")
{
    const Mesh mesh = small_mesh(12);
    const PhysicalParams p = make_params(mesh, UniformData{});
    const ButlerVolmerContext ctx(mesh, p, 0.5);
    const PotentialPair lim = solve_limit(p.u0, ctx);
    const PotentialPair reg = solve_regularized(p.u0, 1e-2, 1.0, ctx);
    for (double v : stack(lim))
        CHECK(v == 0.0);
    for (double v : stack(reg))
        CHECK(v == 0.0);
}

TEST_CASE("residual rows telescope to tau times the mean sum minus the applied current")
{
    Problem pr = random_problem(small_mesh(16), 11);
    pr.params.current_c = -0.5 * pr.params.current_a;  // break compatibility on purpose
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    PotentialPair pot = PotentialPair::zeros(pr.mesh);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : pot.phis)
        v = d(rng);
    for (double& v : pot.phie)
        v = d(rng);
    refresh_norms(pot, pr.mesh);
    const double tau = 0.3;
    const std::vector<double> r = assemble_residual(pot, pr.u, ctx, tau, 0.7);
    double total = 0.0;
    for (double v : r)
        total += v;
    const double applied = pr.params.current_a + pr.params.current_c;
    CHECK(total == Approx(tau * pot.mean_sum - 0.7 * applied).margin(1e-13));
}

TEST_CASE("regularized and limit solves match the dense oracle")
{
    for (std::uint64_t seed : {1u, 2u}) {
        Problem pr = random_problem(small_mesh(8), seed);
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        const PotentialPair reg = solve_regularized(pr.u, 0.05, 1.0, ctx);
        const PotentialPair reg_ref = brute_force_solve(pr.mesh, pr.u, 0.05, 1.0, ctx, pr.params);
        CHECK(max_abs_diff(stack(reg), stack(reg_ref)) < 1e-8);
        const PotentialPair lim = solve_limit(pr.u, ctx, {}, 0.5);
        const PotentialPair lim_ref = brute_force_solve(pr.mesh, pr.u, 0.0, 0.5, ctx, pr.params);
        CHECK(max_abs_diff(stack(lim), stack(lim_ref)) < 1e-8);
    }
}

TEST_CASE("incompatible current is reported by the constraint stage")
{
    Problem pr = random_problem(small_mesh(12), 4);
    pr.params.current_c = 0.0;
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    try {
        solve_limit(pr.u, ctx);
        FAIL("expected a constraint failure");
    } catch (const SolverError& e) {
        CHECK(e.stage() == SolverStage::Constraint);
    }
}

TEST_CASE("map B fixed point is the regularized solution")
{
    Problem pr = random_problem(small_mesh(12), 9, 0.1);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const double tau = 0.5;
    const PotentialPair sol = solve_regularized(pr.u, tau, 1.0, ctx);
    const PotentialPair again = apply_B(sol, pr.u, tau, 1.0, ctx);
    CHECK(max_abs_diff(stack(sol), stack(again)) < 1e-9);
    CHECK_THROWS_AS(apply_B(sol, pr.u, 0.0, 1.0, ctx), std::invalid_argument);
}

TEST_CASE("continuation warm-starts along decreasing tau")
{
    Problem pr = random_problem(small_mesh(12), 21);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const std::vector<double> taus{1.0, 1e-2, 1e-4};
    const auto sweep = tau_continuation(pr.u, taus, 1.0, ctx);
    REQUIRE(sweep.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(sweep[i].tau == taus[i]);
    CHECK(sweep.back().newton_iters <= sweep.front().newton_iters + 2);
}

TEST_CASE("energy balance closes on converged pairs and reports its terms")
{
    Problem pr = random_problem(small_mesh(16), 17);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const PotentialPair lim = solve_limit(pr.u, ctx);
    const EnergyBalance b = energy_balance(lim, pr.u, ctx);
    CHECK(b.grad_solid > 0.0);
    CHECK(b.grad_electrolyte > 0.0);
    CHECK(b.kernel != 0.0);
    CHECK(b.residual() <= 1e-10 * b.scale());
}

TEST_CASE("gradients are exact for linear fields away from the boundary")
{
    const Mesh mesh = build_sandwich_mesh({1.0, 0.4, 1.0}, {5, 2, 5});
    const PhysicalParams p = make_params(mesh, UniformData{});
    PotentialPair pot = PotentialPair::zeros(mesh);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        pot.phie[c] = 3.0 * mesh.cell(static_cast<int>(c)).centroid[0];
    const PotentialGradients g = potential_gradients(pot, mesh, p);
    for (std::size_t c = 1; c + 1 < mesh.num_cells(); ++c)
        CHECK(g.electrolyte[c][0] == Approx(3.0));
}

TEST_CASE("a priori diagnostics summarize a solve")
{
    Problem pr = random_problem(small_mesh(12), 8);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const PotentialPair lim = solve_limit(pr.u, ctx);
    const AprioriDiagnostics d = apriori_diagnostics(lim, pr.u, ctx);
    CHECK(d.sup_phis == lim.sup_phis);
    CHECK(d.l2_phis > 0.0);
    CHECK(std::abs(d.mean_sum) <= 1e-10 * mean_sum_scale(lim, pr.mesh));
    // with uniform A_s the net interfacial current equals the net applied current, zero here
    CHECK(std::abs(d.ifara_integral) < 1e-9);
}

TEST_CASE("2D solves stay within the zero-mean identity")
{
    const Mesh mesh = build_sandwich_mesh({1.0, 0.4, 1.0}, {3, 2, 3}, TransverseExtent{0.5, 3});
    Problem pr = random_problem(mesh, 12);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const PotentialPair lim = solve_limit(pr.u, ctx);
    CHECK(std::abs(lim.mean_sum) <= 1e-10 * mean_sum_scale(lim, pr.mesh));
    CHECK(energy_identity_residual(lim, pr.u, ctx) <= 1e-10 * energy_balance(lim, pr.u, ctx).scale());
}
