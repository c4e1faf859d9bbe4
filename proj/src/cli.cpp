#include "tecell/cli.hpp"

#include "tecell/config.hpp"
#include "tecell/coupled.hpp"
#include "tecell/errors.hpp"
#include "tecell/field_io.hpp"
#include "tecell/mms.hpp"
#include "tecell/oracle.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <ostream>

namespace tecell {

namespace {

struct Loaded {
    RunConfig config;
    Mesh mesh;
    PhysicalParams params;
    ValidationReport report;
};

Loaded load(const std::string& path)
{
    RunConfig config = load_config(path);
    Mesh mesh = build_mesh(config);
    PhysicalParams params = build_params(config, mesh);
    try {
        check_structure(params, mesh);
    } catch (const StructuralError& e) {
        throw ConfigError(e.what());
    }
    ValidationReport report = validate_hypotheses(params, mesh);
    return {std::move(config), std::move(mesh), std::move(params), std::move(report)};
}

int report_validation_failure(const ValidationReport& report, std::ostream& err)
{
    for (const HypothesisCheck& h : report.checks) {
        if (!h.pass)
            err << "error: " << h.id << " failed: " << h.detail << '\n';
    }
    err << report.to_text();
    return kExitValidation;
}

int mode_run(const Loaded& in, const std::optional<std::string>& out_dir, std::ostream& out, std::ostream& err)
{
    const SolverSettings settings = resolved_settings(in.config, in.params);
    const ButlerVolmerContext ctx(in.mesh, in.params, settings.eps);
    const SimulationResult result = run_simulation(in.mesh, in.params, ctx, settings);

    RunLog log;
    log.section("config", config_echo(in.config));
    log.section("mesh", mesh_summary(in.mesh));
    log.section("validation", in.report.to_text() + in.report.to_machine());
    log.section("summary", run_summary(result));
    std::string steps;
    for (const StepDiagnostics& d : result.diagnostics) {
        steps += "t = " + format_number(d.time) + ", picard_iters = " + std::to_string(d.picard_iters) +
                 ", certificate = " + format_number(d.picard_certificate) +
                 ", max_deviation = " + format_number(d.max_deviation) +
                 ", linf_ratio = " + format_number(d.linf.ratio) +
                 ", positivity_violation = " + (d.positivity_violation ? "1" : "0") + "\n";
    }
    log.section("steps", steps);
    const std::filesystem::path dir = out_dir.value_or(in.config.output.directory);
    write_run_outputs(dir, in.mesh, result, in.config.output, log);

    out << run_summary(result);
    if (!result.completed) {
        err << "error: solver failure: " << result.failure << '\n';
        return kExitSolver;
    }
    return kExitOk;
}

int mode_mms(std::ostream& out)
{
    for (const std::string& id : mms_catalog()) {
        const MmsCase c = mms_case(id);
        out << c.description << '\n';
        for (const RefinementStudy& s : default_studies(c))
            out << render_study(s);
        if (c.potential) {
            const Mesh mesh =
                build_sandwich_mesh(c.potential->lengths, proportional_cells(c.potential->lengths, 4));
            out << "compatibility residual " << format_number(c.potential->compatibility_residual(mesh)) << '\n';
        }
        out << '\n';
    }
    return kExitOk;
}

int mode_sweep(const Loaded& in, std::ostream& out)
{
    const SolverSettings settings = resolved_settings(in.config, in.params);
    const ButlerVolmerContext ctx(in.mesh, in.params, settings.eps);
    const std::vector<double>& u = in.params.u0;
    const std::vector<PotentialPair> sweep =
        tau_continuation(u, settings.tau_sequence, settings.delta, ctx, settings.nonlinear);
    const PotentialPair limit = solve_limit(u, ctx, settings.nonlinear, settings.delta, &sweep.back());
    const std::vector<double> ref = stacked(limit);

    char line[200];
    std::snprintf(line, sizeof line, "%12s %14s %14s %14s %14s %14s %6s\n", "tau", "sup_phis", "sup_phie", "mean_sum",
                  "gap_to_limit", "energy_resid", "iters");
    out << line;
    auto row = [&](const PotentialPair& p, double gap) {
        std::snprintf(line, sizeof line, "%12.4e %14.6e %14.6e %14.6e %14.6e %14.6e %6d\n", p.tau, p.sup_phis,
                      p.sup_phie, p.mean_sum, gap, energy_identity_residual(p, u, ctx), p.newton_iters);
        out << line;
    };
    for (const PotentialPair& p : sweep) {
        const std::vector<double> v = stacked(p);
        double gap = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            gap = std::max(gap, std::abs(v[i] - ref[i]));
        row(p, gap);
    }
    row(limit, 0.0);
    return kExitOk;
}

int mode_oracle(const Loaded& in, std::ostream& out)
{
    const SolverSettings settings = resolved_settings(in.config, in.params);
    const ButlerVolmerContext ctx(in.mesh, in.params, settings.eps);
    const std::vector<double>& u = in.params.u0;
    std::vector<OracleReport> reports;

    const PotentialPair limit = solve_limit(u, ctx, settings.nonlinear, settings.delta);
    const PotentialPair limit_ref = brute_force_solve(in.mesh, u, 0.0, settings.delta, ctx, in.params);
    reports.push_back(compare("config tau=0", "potentials", stacked(limit), stacked(limit_ref), 1e-8));

    const double tau = settings.tau_sequence.front();
    const PotentialPair reg = solve_regularized(u, tau, settings.delta, ctx, settings.nonlinear);
    const PotentialPair reg_ref = brute_force_solve(in.mesh, u, tau, settings.delta, ctx, in.params);
    reports.push_back(compare("config tau=" + format_number(tau), "potentials", stacked(reg), stacked(reg_ref), 1e-8));

    SolverSettings step_settings = settings;
    step_settings.tau_mode = TauMode::ConstrainedZero;
    const CoupledSolver solver(in.mesh, in.params, ctx, step_settings);
    const TemperatureField start{u, 0.0};
    const StepMapOutput main = solver.apply_J(u, start, settings.dt);
    const OracleStep ref = oracle_step(in.mesh, u, u, 0.0, settings.dt, 0.0, settings.delta, ctx, in.params);
    reports.push_back(compare("config step map", "temperature", main.u.values, ref.u, 1e-8));

    out << render_reports(reports);
    for (const OracleReport& r : reports)
        if (!r.pass)
            return kExitSolver;
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Thermal-electrochemical cell solver with truncated Butler-Volmer kinetics"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::string> output_dir;

    auto* run = app.add_subcommand("run", "full simulation with CSV and field outputs");
    run->add_option("--config", config_path, "configuration file")->required();
    run->add_option("--output-dir", output_dir, "overrides output.directory");
    auto* validate = app.add_subcommand("validate", "hypothesis report only");
    validate->add_option("--config", config_path, "configuration file")->required();
    auto* mms = app.add_subcommand("mms", "manufactured-solution refinement tables");
    mms->add_option("--config", config_path, "configuration file")->required();
    auto* sweep = app.add_subcommand("sweep-tau", "tau-continuation diagnostics at the initial temperature");
    sweep->add_option("--config", config_path, "configuration file")->required();
    auto* oracle = app.add_subcommand("oracle-compare", "main solvers against the dense reference");
    oracle->add_option("--config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const Loaded in = load(config_path);
        if (!in.report.all_pass())
            return report_validation_failure(in.report, err);
        if (validate->parsed()) {
            out << in.report.to_text();
            return kExitOk;
        }
        if (run->parsed())
            return mode_run(in, output_dir, out, err);
        if (mms->parsed())
            return mode_mms(out);
        if (sweep->parsed())
            return mode_sweep(in, out);
        if (oracle->parsed())
            return mode_oracle(in, out);
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        err << "error: solver (" << to_string(e.stage()) << "): " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolver;
    }
    return kExitOk;
}

}  // namespace tecell
