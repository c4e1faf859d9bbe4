// Acceptance suite: one line per criterion, non-zero exit when any selected criterion fails.
// Usage: acceptance [N ...]   (no arguments runs all twelve)

#include "support.hpp"

#include "tecell/cli.hpp"
#include "tecell/config.hpp"
#include "tecell/coupled.hpp"
#include "tecell/heat.hpp"
#include "tecell/mms.hpp"
#include "tecell/oracle.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

using namespace tecell;
using namespace tecell::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr std::uint64_t kSeeds[] = {101, 202, 303};

double rel_change(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

Verdict kernel_exactness()
{
    Problem pr = random_problem(small_mesh(16), 7);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const auto cells = pr.mesh.electrode_cells();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_rel = 0.0;
    int sign_bad = 0, mono_bad = 0, secant_bad = 0, floor_bad = 0, pairs = 0;
    double min_secant = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10000; ++i) {
        const std::size_t e = static_cast<std::size_t>(rng() % cells.size());
        const int cell = cells[e];
        const std::size_t c = static_cast<std::size_t>(cell);
        const double u = pr.params.u0[c] + (2.0 * unit(rng) - 1.0) * 2.0 * ctx.eps();
        const double U = ctx.U()[e];
        const double y2 = U + (2.0 * unit(rng) - 1.0) * 3.0;
        const double a = i_fara_eps(u, y2, cell, ctx);
        const double b = i_fara_sinh_form(u, y2, cell, ctx);
        if (b != 0.0)
            worst_rel = std::max(worst_rel, std::abs(a - b) / std::abs(b));
        else if (a != 0.0)
            worst_rel = 1.0;
        if ((y2 > U && !(a > 0.0)) || (y2 < U && !(a < 0.0)))
            ++sign_bad;
        // partner point at the same temperature and cell
        const double y2b = y2 + 1e-3 + unit(rng) * 0.5;
        const double ab = i_fara_eps(u, y2b, cell, ctx);
        ++pairs;
        if (!(ab > a))
            ++mono_bad;
        const double secant = (ab - a) / (y2b - y2);
        min_secant = std::min(min_secant, secant);
        if (secant < ctx.c0())
            ++secant_bad;
        if (secant < ctx.coercivity_floor())
            ++floor_bad;
    }
    const bool pass = worst_rel <= 1e-14 && sign_bad == 0 && mono_bad == 0 && secant_bad == 0;
    return {pass, fmt("max rel %.2e, sign violations %d, monotonicity violations %d/%d, "
                      "secant < c0=%.4g: %d/%d (min secant %.4g; floor 2 g0 alpha/(max u0+eps)=%.4g violated %d)",
                      worst_rel, sign_bad, mono_bad, pairs, ctx.c0(), secant_bad, pairs, min_secant,
                      ctx.coercivity_floor(), floor_bad)};
}

Verdict derivative_fidelity()
{
    Problem pr = random_problem(small_mesh(16), 8);
    const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
    const auto cells = pr.mesh.electrode_cells();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<FdPoint> y2pts, upts;
    for (int i = 0; i < 100; ++i) {
        const std::size_t e = static_cast<std::size_t>(rng() % cells.size());
        const int cell = cells[e];
        const std::size_t c = static_cast<std::size_t>(cell);
        const double U = ctx.U()[e];
        y2pts.push_back({pr.params.u0[c] + (2.0 * unit(rng) - 1.0) * ctx.eps(), U + (2.0 * unit(rng) - 1.0), cell});
        // band interior, away from y2 = U where the u-derivative vanishes
        const double side = unit(rng) < 0.5 ? -1.0 : 1.0;
        upts.push_back({pr.params.u0[c] + (2.0 * unit(rng) - 1.0) * 0.9 * ctx.eps(), U + side * (0.05 + unit(rng)), cell});
    }
    const FdReport a = fd_check(DerivativeId::IfaraY2, y2pts, 1e-6, ctx);
    const FdReport b = fd_check(DerivativeId::IfaraU, upts, 1e-6, ctx);
    const bool pass = a.evaluated == 100 && b.evaluated == 100 && a.max_rel_error <= 1e-6 && b.max_rel_error <= 1e-6;
    return {pass, fmt("d/dy2 max rel %.2e over %zu points, d/du max rel %.2e over %zu points (excluded %zu)",
                      a.max_rel_error, a.evaluated, b.max_rel_error, b.evaluated, b.excluded)};
}

std::vector<Problem> data_sets(int cells)
{
    std::vector<Problem> sets;
    for (std::uint64_t s : kSeeds)
        sets.push_back(random_problem(small_mesh(cells), s));
    return sets;
}

PotentialPair solve_at(double tau, double delta, const Problem& pr, const ButlerVolmerContext& ctx,
                       const PotentialPair* initial = nullptr)
{
    if (tau == 0.0)
        return solve_limit(pr.u, ctx, {}, delta, initial);
    return solve_regularized(pr.u, tau, delta, ctx, {}, initial);
}

Verdict zero_mean()
{
    std::vector<Problem> sets = data_sets(16);
    sets.push_back(random_problem(build_sandwich_mesh({1.0, 0.4, 1.0}, {4, 2, 4}, TransverseExtent{0.5, 3}), 404));
    double worst = 0.0;
    int solves = 0;
    for (const Problem& pr : sets) {
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        for (double tau : {0.0, 1e-6, 1e-2, 1.0})
            for (double delta : {0.25, 1.0}) {
                const PotentialPair p = solve_at(tau, delta, pr, ctx);
                worst = std::max(worst, std::abs(p.mean_sum) / mean_sum_scale(p, pr.mesh));
                ++solves;
            }
    }
    return {worst <= 1e-10, fmt("max |mean sum|/scale %.2e over %d solves", worst, solves)};
}

Verdict uniqueness()
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    double worst = 0.0;
    for (const Problem& pr : data_sets(16)) {
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        for (double tau : {0.0, 1e-2}) {
            std::vector<std::vector<double>> sols;
            for (int k = 0; k < 10; ++k) {
                PotentialPair guess = PotentialPair::zeros(pr.mesh);
                for (double& v : guess.phis)
                    v = d(rng);
                for (double& v : guess.phie)
                    v = d(rng);
                sols.push_back(stack(solve_at(tau, 1.0, pr, ctx, &guess)));
            }
            for (std::size_t i = 0; i < sols.size(); ++i)
                for (std::size_t j = i + 1; j < sols.size(); ++j)
                    worst = std::max(worst, max_abs_diff(sols[i], sols[j]));
        }
    }
    return {worst <= 1e-9, fmt("max pairwise spread %.2e (10 guesses x 3 sets x tau in {0, 1e-2})", worst)};
}

Verdict constant_solution()
{
    double worst = 0.0;
    for (int cells : {12, 48}) {
        Problem pr = random_problem(small_mesh(cells), 500 + static_cast<std::uint64_t>(cells));
        pr.params.U.assign(pr.params.U.size(), 0.27);
        pr.params.current_a = 0.0;
        pr.params.current_c = 0.0;
        std::fill(pr.params.f_cell.begin(), pr.params.f_cell.end(), Vec2{0.0, 0.0});
        std::fill(pr.params.f_normal.begin(), pr.params.f_normal.end(), 0.0);
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        const PotentialPair p = solve_limit(pr.u, ctx);
        const double whole = region_measure(pr.mesh, RegionSet::Whole);
        const double electrodes = region_measure(pr.mesh, RegionSet::Electrodes);
        const double c2 = -0.27 * electrodes / (whole + electrodes);
        for (double v : p.phie)
            worst = std::max(worst, std::abs(v - c2));
        for (double v : p.phis)
            worst = std::max(worst, std::abs(v - (c2 + 0.27)));
    }
    return {worst <= 1e-10, fmt("max deviation from (c1, c2) %.2e on 12 and 48 cells", worst)};
}

Verdict continuation()
{
    const std::vector<double> taus{1e-2, 1e-4, 1e-6, 1e-8};
    bool pass = true;
    double last_gap = 0.0, worst_sup = 0.0;
    std::string gaps_text;
    for (const Problem& pr : data_sets(16)) {
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        const auto sweep = tau_continuation(pr.u, taus, 1.0, ctx);
        const std::vector<double> limit = stack(solve_limit(pr.u, ctx));
        std::vector<double> gaps;
        for (const auto& p : sweep)
            gaps.push_back(max_abs_diff(stack(p), limit));
        for (std::size_t i = 1; i < gaps.size(); ++i)
            pass = pass && gaps[i] < gaps[i - 1];
        last_gap = std::max(last_gap, gaps.back());
        const auto& a = sweep[sweep.size() - 2];
        const auto& b = sweep.back();
        worst_sup = std::max({worst_sup, rel_change(a.sup_phis, b.sup_phis), rel_change(a.sup_phie, b.sup_phie)});
        if (gaps_text.empty())
            gaps_text = fmt("%.2e %.2e %.2e %.2e", gaps[0], gaps[1], gaps[2], gaps[3]);
    }
    pass = pass && last_gap <= 1e-6 && worst_sup <= 0.01;
    return {pass, fmt("gap at 1e-8 %.2e, gaps (set 1) %s, sup change %.2e", last_gap, gaps_text.c_str(), worst_sup)};
}

Verdict energy_identity()
{
    std::vector<Problem> sets = data_sets(16);
    sets.push_back(random_problem(build_sandwich_mesh({1.0, 0.4, 1.0}, {4, 2, 4}, TransverseExtent{0.5, 3}), 404));
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
    double worst = 0.0, weakest_probe = std::numeric_limits<double>::infinity();
    int solves = 0;
    for (const Problem& pr : sets) {
        const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
        for (double tau : {0.0, 1e-6, 1e-2, 1.0})
            for (double delta : {0.25, 1.0}) {
                PotentialPair p = solve_at(tau, delta, pr, ctx);
                const double scale = energy_balance(p, pr.u, ctx).scale();
                worst = std::max(worst, energy_identity_residual(p, pr.u, ctx) / scale);
                ++solves;
                for (double& v : p.phis)
                    v += noise(rng);
                for (double& v : p.phie)
                    v += noise(rng);
                refresh_norms(p, pr.mesh);
                weakest_probe = std::min(weakest_probe, energy_identity_residual(p, pr.u, ctx) / scale);
            }
    }
    const bool pass = worst <= 1e-10 && weakest_probe > 1e-8;
    return {pass, fmt("max residual/scale %.2e over %d solves, smallest perturbed residual/scale %.2e", worst, solves,
                      weakest_probe)};
}

Verdict oracle_equivalence()
{
    double worst = 0.0;
    int cases = 0;
    for (int cells : {8, 16})
        for (const Problem& pr : data_sets(cells)) {
            const ButlerVolmerContext ctx(pr.mesh, pr.params, 0.5);
            const PotentialPair reg = solve_regularized(pr.u, 1e-2, 1.0, ctx);
            worst = std::max(worst, max_abs_diff(stack(reg), stack(brute_force_solve(pr.mesh, pr.u, 1e-2, 1.0, ctx,
                                                                                    pr.params))));
            const PotentialPair lim = solve_limit(pr.u, ctx);
            worst = std::max(worst, max_abs_diff(stack(lim), stack(brute_force_solve(pr.mesh, pr.u, 0.0, 1.0, ctx,
                                                                                    pr.params))));
            SolverSettings s;
            s.eps = 0.5;
            const CoupledSolver solver(pr.mesh, pr.params, ctx, s);
            const StepMapOutput out = solver.apply_J(pr.u, {pr.params.u0, 0.0}, 0.1);
            const OracleStep ref = oracle_step(pr.mesh, pr.u, pr.params.u0, 0.0, 0.1, 0.0, s.delta, ctx, pr.params);
            worst = std::max({worst, max_abs_diff(out.u.values, ref.u), max_abs_diff(out.source, ref.source),
                              max_abs_diff(stack(out.potentials), stack(ref.potentials))});
            ++cases;
        }
    return {worst <= 1e-8, fmt("max difference %.2e over %d cases (tau=1e-2, tau=0, one-step map)", worst, cases)};
}

Verdict heat_mms()
{
    const MmsCase space = mms_case("heat");
    const RefinementStudy s = heat_space_study(*space.heat, "heat", {1, 2, 4, 8}, 0.1, 1.0);
    const MmsCase time = mms_case("heat-time");
    const RefinementStudy t = heat_time_study(*time.heat, "heat-time", 80, {0.2, 0.1, 0.05, 0.025}, 1.0);

    const Mesh mesh = small_mesh(16);
    const PhysicalParams eq = make_params(mesh, UniformData{});
    const ButlerVolmerContext ctx(mesh, eq, 1.0);
    SolverSettings settings;
    settings.eps = 1.0;
    settings.horizon = 10.0;
    const SimulationResult r = run_simulation(mesh, eq, ctx, settings);
    double eq_dev = r.completed ? 0.0 : 1.0;
    for (const auto& u : r.temperatures)
        for (double v : u.values)
            eq_dev = std::max(eq_dev, std::abs(v - eq.T_a));

    UniformData d;
    d.k1 = 0.0;
    d.rho_cp = 2.5;
    const PhysicalParams ins = make_params(mesh, d);
    TemperatureField u{ins.u0, 0.0};
    const double c = 0.8;
    const std::vector<double> q(mesh.num_cells(), c);
    const std::vector<double> w(mesh.num_faces(), 0.0);
    double ins_dev = 0.0;
    for (int n = 1; n <= 100; ++n) {
        u = step_temperature(u, q, w, 0.1, mesh, ins);
        for (std::size_t i = 0; i < u.values.size(); ++i)
            ins_dev = std::max(ins_dev, std::abs(u.values[i] - (ins.u0[i] + c * u.time / ins.rho_cp)));
    }

    const bool pass = std::abs(s.rate - 2.0) <= 0.2 && std::abs(t.rate - 1.0) <= 0.2 && r.times.size() == 101 &&
                      eq_dev <= 1e-12 && ins_dev <= 1e-12;
    return {pass, fmt("space rate %.3f, time rate %.3f, equilibrium drift %.2e over %zu steps, insulated error %.2e",
                      s.rate, t.rate, eq_dev, r.times.size() - 1, ins_dev)};
}

const char* kEquilibrium = R"(mesh.L_a = 1
mesh.L_s = 0.4
mesh.L_c = 1
mesh.n_a = 5
mesh.n_s = 2
mesh.n_c = 5
params.T_a = 2
params.u0 = 2
solver.dt = 0.1
solver.T = 2
solver.eps = 0.3
)";

const char* kLargeForcing = R"(mesh.L_a = 1
mesh.L_s = 0.4
mesh.L_c = 1
mesh.n_a = 5
mesh.n_s = 2
mesh.n_c = 5
params.T_a = 2
params.u0 = 2
params.k1 = 0.2
params.I_a = 0.8
params.I_c = -0.8
params.sigma_s = 0.5
params.sigma_e = 0.5
solver.dt = 0.1
solver.T = 2
solver.eps = 0.3
)";

Verdict tstar_mechanism()
{
    const RunConfig eq_cfg = parse_config(kEquilibrium);
    const Mesh eq_mesh = build_mesh(eq_cfg);
    const PhysicalParams eq_p = build_params(eq_cfg, eq_mesh);
    const SolverSettings eq_s = resolved_settings(eq_cfg, eq_p);
    const ButlerVolmerContext eq_ctx(eq_mesh, eq_p, eq_s.eps);
    const SimulationResult eq = run_simulation(eq_mesh, eq_p, eq_ctx, eq_s);

    const RunConfig cfg = parse_config(kLargeForcing);
    const Mesh mesh = build_mesh(cfg);
    const PhysicalParams p = build_params(cfg, mesh);
    SolverSettings s = resolved_settings(cfg, p);
    const ButlerVolmerContext ctx(mesh, p, s.eps);
    const SimulationResult r = run_simulation(mesh, p, ctx, s);
    if (!r.completed || r.t_star.horizon)
        return {false, fmt("equilibrium horizon=%d, forced completed=%d horizon=%d", eq.t_star.horizon, r.completed,
                           r.t_star.horizon)};
    const double ts = r.t_star.time;
    bool flags_ok = ts > 0.0 && ts < s.horizon;
    std::size_t last = 0;
    for (std::size_t n = 0; n < r.times.size(); ++n)
        if (r.times[n] <= ts) {
            flags_ok = flags_ok && !r.diagnostics[n].truncation_active;
            last = n;
        }
    flags_ok = flags_ok && last + 1 < r.times.size() && r.diagnostics[last + 1].truncation_active;

    // replay up to t_star with the clamp removed
    const ButlerVolmerContext plain = ctx.untruncated();
    SolverSettings short_run = s;
    short_run.horizon = r.times[last];
    const SimulationResult replay = run_simulation(mesh, p, plain, short_run);
    double diff = replay.temperatures.size() == last + 1 ? 0.0 : 1.0;
    for (std::size_t n = 0; n <= last && n < replay.temperatures.size(); ++n) {
        diff = std::max(diff, max_abs_diff(replay.temperatures[n].values, r.temperatures[n].values));
        diff = std::max(diff, max_abs_diff(stack(replay.potentials[n]), stack(r.potentials[n])));
    }
    const CoupledSolver clamped(mesh, p, ctx, s);
    const CoupledSolver open(mesh, p, plain, s);
    for (std::size_t n = 1; n <= last; ++n) {
        const auto a = clamped.apply_J(r.temperatures[n].values, r.temperatures[n - 1], s.dt, &r.potentials[n]);
        const auto b = open.apply_J(r.temperatures[n].values, r.temperatures[n - 1], s.dt, &r.potentials[n]);
        diff = std::max({diff, max_abs_diff(a.u.values, b.u.values), max_abs_diff(a.source, b.source),
                         max_abs_diff(stack(a.potentials), stack(b.potentials))});
    }
    const bool pass = eq.completed && eq.t_star.horizon && flags_ok && diff <= 1e-12;
    return {pass, fmt("equilibrium t_star=%s, forced t_star=%.3g of %.3g, truncation flags %s, untruncated replay diff %.2e",
                      eq.t_star.horizon ? "horizon" : "finite", ts, s.horizon, flags_ok ? "ok" : "wrong", diff)};
}

std::filesystem::path scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "tecell_acceptance" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int cli(std::vector<std::string> args, std::string& err)
{
    std::vector<const char*> argv{"tecell"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    err = e.str();
    return code;
}

Verdict hypothesis_gate()
{
    const std::vector<std::pair<std::string, std::string>> cases{
        {"H1", "params.rho_cp = -1\n"},
        {"H2", "params.sigma_e = -1\n"},
        {"H3", "params.U_a = inf\n"},
        {"H4", "params.g0 = 2\nparams.g1 = 1\n"},
        {"H5", "params.f_profile = constant\nparams.f_amplitude = 1\n"},
        {"H6", "params.I_a = 1\nparams.I_c = 0.5\n"},
        {"H7", "mesh.L_s = 0.6\n"},
    };
    const auto dir = scratch("gate");
    bool pass = true;
    std::string summary;
    for (const auto& [id, extra] : cases) {
        std::string text = kEquilibrium;
        if (id == "H7")
            text.replace(text.find("mesh.L_s = 0.4\n"), 15, "");
        const auto path = dir / (id + ".cfg");
        std::ofstream(path) << text << extra;
        std::string err;
        const int code = cli({"validate", "--config", path.string()}, err);
        const bool ok = code == kExitValidation && err.find(id + " failed") != std::string::npos;
        pass = pass && ok;
        summary += fmt("%s:%d%s ", id.c_str(), code, ok ? "" : "(wrong)");
    }
    return {pass, "exit codes " + summary};
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism()
{
    const auto dir = scratch("determinism");
    const auto cfg = dir / "forced.cfg";
    std::ofstream(cfg) << kLargeForcing << "output.snapshot_stride = 2\n";
    std::string err;
    const int a = cli({"run", "--config", cfg.string(), "--output-dir", (dir / "a").string()}, err);
    const int b = cli({"run", "--config", cfg.string(), "--output-dir", (dir / "b").string()}, err);
    int compared = 0, differing = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
        if (entry.path().extension() != ".csv")
            continue;
        ++compared;
        const auto other = dir / "b" / entry.path().filename();
        if (!std::filesystem::exists(other) || slurp(entry.path()) != slurp(other))
            ++differing;
    }
    const bool pass = a == kExitOk && b == kExitOk && compared >= 2 && differing == 0;
    return {pass, fmt("exit codes %d/%d, %d CSV files compared, %d differ", a, b, compared, differing)};
}

}  // namespace

int main(int argc, char** argv)
{
    const std::map<int, std::pair<std::string, std::function<Verdict()>>> criteria{
        {1, {"kernel exactness", kernel_exactness}},
        {2, {"derivative fidelity", derivative_fidelity}},
        {3, {"zero-mean identity", zero_mean}},
        {4, {"uniqueness replay", uniqueness}},
        {5, {"analytic constant solution", constant_solution}},
        {6, {"tau continuation", continuation}},
        {7, {"energy identity", energy_identity}},
        {8, {"oracle equivalence", oracle_equivalence}},
        {9, {"heat manufactured solutions", heat_mms}},
        {10, {"T* mechanism", tstar_mechanism}},
        {11, {"hypothesis gate", hypothesis_gate}},
        {12, {"determinism", determinism}},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.push_back(std::stoi(argv[i]));
    if (selected.empty())
        for (const auto& [n, _] : criteria)
            selected.push_back(n);

    int failures = 0;
    for (int n : selected) {
        const auto it = criteria.find(n);
        if (it == criteria.end()) {
            std::cerr << "unknown criterion " << n << '\n';
            return 2;
        }
        Verdict v;
        try {
            v = it->second.second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << n << ' ' << it->second.first << ": " << v.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
