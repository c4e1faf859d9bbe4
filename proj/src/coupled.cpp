#include "tecell/coupled.hpp"

#include "tecell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tecell {

void SolverSettings::validate(double L0) const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string("solver.") + name + " must be positive");
    };
    positive(nonlinear.tol, "nonlinear_tol");
    positive(picard_tol, "picard_tol");
    positive(dt, "dt");
    positive(horizon, "T");
    positive(overflow_ceiling, "overflow_ceiling");
    if (picard_max_iters <= 0)
        throw ConfigError("solver.picard_max_iters must be positive");
    if (!(picard_relaxation > 0.0 && picard_relaxation <= 1.0))
        throw ConfigError("solver.picard_relaxation must lie in (0, 1]");
    if (!(delta > 0.0 && delta <= 1.0))
        throw ConfigError("solver.delta must lie in (0, 1]");
    if (!(eps > 0.0 && eps < L0))
        throw ConfigError("solver.eps must lie in (0, L0) with L0 = " + std::to_string(L0));
    if (tau_mode == TauMode::Continuation) {
        if (tau_sequence.empty())
            throw ConfigError("solver.tau_sequence must not be empty in continuation mode");
        for (double t : tau_sequence)
            positive(t, "tau_sequence entries");
    }
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_deviation(std::span<const double> u, std::span<const double> u0)
{
    return max_abs_diff(u, u0);
}

}  // namespace

CoupledSolver::CoupledSolver(const Mesh& mesh, const PhysicalParams& params, const ButlerVolmerContext& ctx,
                             SolverSettings settings)
    : mesh_(mesh), params_(params), ctx_(ctx), settings_(std::move(settings))
{
}

PotentialPair CoupledSolver::solve_potentials(std::span<const double> v, double time, const PotentialPair* warm) const
{
    const ButlerVolmerContext ctx = ctx_.at_time(time);
    if (settings_.tau_mode == TauMode::ConstrainedZero)
        return solve_limit(v, ctx, settings_.nonlinear, settings_.delta, warm);
    PotentialPair current = warm ? *warm : PotentialPair::zeros(mesh_);
    for (double tau : settings_.tau_sequence)
        current = solve_regularized(v, tau, settings_.delta, ctx, settings_.nonlinear, &current);
    return current;
}

StepMapOutput CoupledSolver::apply_J(std::span<const double> v, const TemperatureField& u_prev, double dt,
                                     const PotentialPair* warm) const
{
    const double t_next = u_prev.time + dt;
    StepMapOutput out;
    out.potentials = solve_potentials(v, t_next, warm);
    const PotentialGradients grads = potential_gradients(out.potentials, mesh_, params_);
    const ButlerVolmerContext ctx = ctx_.at_time(t_next);
    out.source = source_Q_eps(v, out.potentials.phis, out.potentials.phie, grads.solid, grads.electrolyte, ctx,
                              &out.potentials.flags);
    const std::vector<double> w_boundary = boundary_effective_temperature(v, ctx);
    try {
        out.u = step_temperature(u_prev, out.source, w_boundary, dt, mesh_, params_);
    } catch (const std::invalid_argument& err) {
        throw SolverError(SolverStage::Heat, err.what());
    }
    return out;
}

PicardOutcome CoupledSolver::picard_step(const TemperatureField& u_prev, double dt, const PotentialPair* warm) const
{
    PicardOutcome outcome;
    std::vector<double> v = u_prev.values;
    PotentialPair guess = warm ? *warm : PotentialPair::zeros(mesh_);
    double omega = settings_.picard_relaxation;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= settings_.picard_max_iters; ++k) {
        StepMapOutput out = apply_J(v, u_prev, dt, &guess);
        const double d = max_abs_diff(out.u.values, v);
        outcome.history.push_back(d);
        if (!std::isfinite(d))
            throw SolverError(SolverStage::Picard, "non-finite Picard update", outcome.history);
        if (d <= settings_.picard_tol) {
            outcome.u.values = std::move(v);
            outcome.u.time = u_prev.time + dt;
            outcome.potentials = std::move(out.potentials);
            outcome.source = std::move(out.source);
            outcome.iters = k;
            outcome.certificate = d;
            outcome.relaxation = omega;
            return outcome;
        }
        if (d > previous)
            omega = std::max(0.5 * omega, settings_.relaxation_floor);
        previous = d;
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = (1.0 - omega) * v[i] + omega * out.u.values[i];
        guess = std::move(out.potentials);
    }
    std::ostringstream msg;
    msg << "Picard iteration did not reach " << settings_.picard_tol << " in " << settings_.picard_max_iters
        << " iterations (last update " << outcome.history.back() << ")";
    throw SolverError(SolverStage::Picard, msg.str(), outcome.history);
}

StepDiagnostics CoupledSolver::diagnose(const TemperatureField& u, const PotentialPair& pot, double q_norm) const
{
    StepDiagnostics d;
    d.time = u.time;
    const auto& vals = u.values;
    d.min_u = *std::min_element(vals.begin(), vals.end());
    d.max_u = *std::max_element(vals.begin(), vals.end());
    double integral = 0.0;
    for (std::size_t c = 0; c < vals.size(); ++c)
        integral += vals[c] * mesh_.cell(static_cast<int>(c)).measure;
    d.mean_u = integral / region_measure(mesh_, RegionSet::Whole);
    d.sup_phis = pot.sup_phis;
    d.sup_phie = pot.sup_phie;
    d.max_deviation = max_deviation(vals, params_.u0);
    d.truncation_active = d.max_deviation > ctx_.eps();
    d.mean_sum = pot.mean_sum;
    const ButlerVolmerContext ctx = ctx_.at_time(u.time);
    const EnergyBalance balance = energy_balance(pot, vals, ctx);
    d.energy_residual = balance.residual();
    d.energy_scale = balance.scale();
    d.potential_residual = pot.residual_norm;
    d.kernel_saturated = pot.flags.saturated;
    d.positivity_violation = d.min_u <= 0.0;
    d.linf = linf_monitor(vals, q_norm, params_, settings_.overflow_ceiling);
    return d;
}

std::vector<double> CoupledSolver::step_times() const
{
    std::vector<double> times{0.0};
    const double dt = settings_.dt;
    const double horizon = settings_.horizon;
    for (long n = 1;; ++n) {
        double t = static_cast<double>(n) * dt;
        if (t >= horizon * (1.0 - 1e-12)) {
            times.push_back(horizon);
            break;
        }
        times.push_back(t);
    }
    return times;
}

void CoupledSolver::run_per_step(SimulationResult& result) const
{
    const std::vector<double> times = step_times();
    SourceNormAccumulator q_norm(mesh_.dimension());
    for (std::size_t n = 1; n < times.size(); ++n) {
        const TemperatureField& u_prev = result.temperatures.back();
        const double dt = times[n] - times[n - 1];
        PicardOutcome step = picard_step(u_prev, dt, &result.potentials.back());
        step.u.time = times[n];
        q_norm.add(step.source, mesh_, dt);
        StepDiagnostics d = diagnose(step.u, step.potentials, q_norm.norm());
        d.picard_iters = step.iters;
        d.picard_certificate = step.certificate;
        d.picard_history = step.history;
        result.times.push_back(times[n]);
        result.temperatures.push_back(std::move(step.u));
        result.potentials.push_back(std::move(step.potentials));
        result.diagnostics.push_back(std::move(d));
        if (result.diagnostics.back().linf.tripped)
            throw SolverError(SolverStage::Picard, "temperature exceeded the overflow ceiling");
    }
}

void CoupledSolver::run_trajectory(SimulationResult& result) const
{
    const std::vector<double> times = step_times();
    const std::size_t steps = times.size() - 1;
    const TemperatureField initial = result.temperatures.front();
    std::vector<std::vector<double>> v(steps, initial.values);
    std::vector<PotentialPair> warm(steps, result.potentials.front());
    std::vector<double> history;
    double omega = settings_.picard_relaxation;
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= settings_.picard_max_iters; ++k) {
        std::vector<StepMapOutput> outputs;
        TemperatureField u_prev = initial;
        double d = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
            StepMapOutput out = apply_J(v[n], u_prev, times[n + 1] - times[n], &warm[n]);
            out.u.time = times[n + 1];
            d = std::max(d, max_abs_diff(out.u.values, v[n]));
            u_prev = out.u;
            outputs.push_back(std::move(out));
        }
        history.push_back(d);
        if (d <= settings_.picard_tol) {
            SourceNormAccumulator q_norm(mesh_.dimension());
            for (std::size_t n = 0; n < steps; ++n) {
                TemperatureField accepted{v[n], times[n + 1]};
                q_norm.add(outputs[n].source, mesh_, times[n + 1] - times[n]);
                StepDiagnostics diag = diagnose(accepted, outputs[n].potentials, q_norm.norm());
                diag.picard_iters = k;
                diag.picard_certificate = d;
                diag.picard_history = history;
                result.times.push_back(times[n + 1]);
                result.temperatures.push_back(std::move(accepted));
                result.potentials.push_back(std::move(outputs[n].potentials));
                result.diagnostics.push_back(std::move(diag));
            }
            return;
        }
        if (d > previous)
            omega = std::max(0.5 * omega, settings_.relaxation_floor);
        previous = d;
        for (std::size_t n = 0; n < steps; ++n) {
            for (std::size_t i = 0; i < v[n].size(); ++i)
                v[n][i] = (1.0 - omega) * v[n][i] + omega * outputs[n].u.values[i];
            warm[n] = std::move(outputs[n].potentials);
        }
    }
    throw SolverError(SolverStage::Picard, "trajectory Picard iteration did not converge", history);
}

void CoupledSolver::refine_tstar(SimulationResult& result) const
{
    if (result.t_star_step.horizon)
        return;
    // First snapshot outside the band is the one right after t_star_step.
    std::size_t first = 0;
    while (first < result.times.size() && result.times[first] <= result.t_star_step.time)
        ++first;
    if (first == 0 || first >= result.times.size())
        return;
    const TemperatureField& start = result.temperatures[first - 1];
    double lo = 0.0;
    double hi = result.times[first] - result.times[first - 1];
    for (int it = 0; it < settings_.bisection_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        const PicardOutcome trial = picard_step(start, mid, &result.potentials[first - 1]);
        if (max_deviation(trial.u.values, params_.u0) > ctx_.eps())
            hi = mid;
        else
            lo = mid;
    }
    result.t_star = {false, result.times[first - 1] + lo};
}

SimulationResult CoupledSolver::run() const
{
    SimulationResult result;
    TemperatureField initial{params_.u0, 0.0};
    try {
        PotentialPair pot0 = solve_potentials(initial.values, 0.0);
        StepDiagnostics d0 = diagnose(initial, pot0, 0.0);
        result.times.push_back(0.0);
        result.temperatures.push_back(std::move(initial));
        result.potentials.push_back(std::move(pot0));
        result.diagnostics.push_back(std::move(d0));
        if (settings_.outer_mode == OuterMode::PerStep)
            run_per_step(result);
        else
            run_trajectory(result);
    } catch (const SolverError& err) {
        result.completed = false;
        result.failure = err.what();
    }
    if (!result.temperatures.empty()) {
        result.t_star = detect_tstar(result, params_.u0, ctx_.eps());
        result.t_star_step = result.t_star;
        if (result.completed && settings_.tstar_refinement == TStarRefinement::Bisection &&
            settings_.outer_mode == OuterMode::PerStep) {
            try {
                refine_tstar(result);
            } catch (const SolverError& err) {
                result.completed = false;
                result.failure = err.what();
            }
        }
    }
    return result;
}

SimulationResult run_simulation(const Mesh& mesh, const PhysicalParams& params, const ButlerVolmerContext& ctx,
                                const SolverSettings& settings)
{
    settings.validate(ctx.L0());
    if (settings.eps != ctx.eps())
        throw ConfigError("solver.eps does not match the Butler-Volmer context");
    return CoupledSolver(mesh, params, ctx, settings).run();
}

TStar detect_tstar(const SimulationResult& result, std::span<const double> u0, double eps)
{
    TStar t;
    for (std::size_t n = 0; n < result.temperatures.size(); ++n) {
        const auto& u = result.temperatures[n].values;
        if (max_deviation(u, u0) > eps) {
            t.horizon = false;
            t.time = n == 0 ? 0.0 : result.times[n - 1];
            break;
        }
        for (std::size_t c = 0; c < u.size(); ++c) {
            if (effective_temperature(u[c], u0[c], eps) != u[c])
                throw std::logic_error("effective temperature differs from u inside the band");
        }
    }
    if (t.horizon && !result.times.empty())
        t.time = result.times.back();
    return t;
}

}  // namespace tecell
