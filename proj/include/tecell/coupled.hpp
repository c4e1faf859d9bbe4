#pragma once

#include "tecell/butler_volmer.hpp"
#include "tecell/elliptic.hpp"
#include "tecell/heat.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <span>
#include <string>
#include <vector>

namespace tecell {

enum class TauMode { ConstrainedZero, Continuation };

/// PerStep: Picard on the one-step map at every time step.
/// Trajectory: Picard on the whole time march (all steps frozen at once).
enum class OuterMode { PerStep, Trajectory };

/// StepBoundary: T* at the last fully-inside-band step boundary.
/// Bisection: additionally bisect inside the first step that leaves the band.
enum class TStarRefinement { StepBoundary, Bisection };

struct SolverSettings {
    TauMode tau_mode = TauMode::ConstrainedZero;
    std::vector<double> tau_sequence{1e-2, 1e-4, 1e-6, 1e-8};
    double delta = 1.0;
    NonlinearSettings nonlinear;
    double picard_tol = 1e-9;
    int picard_max_iters = 200;
    double picard_relaxation = 1.0;
    double relaxation_floor = 1.0 / 64.0;
    double dt = 0.1;
    double horizon = 1.0;
    double eps = 0.5;
    double overflow_ceiling = 1e6;
    OuterMode outer_mode = OuterMode::PerStep;
    TStarRefinement tstar_refinement = TStarRefinement::StepBoundary;
    int bisection_iters = 30;

    /// Throws ConfigError for non-positive tolerances, relaxation outside
    /// (0, 1], or eps outside (0, L0).
    void validate(double L0) const;
};

/// Result of one application of the one-step map J.
struct StepMapOutput {
    TemperatureField u;
    PotentialPair potentials;  ///< solved at the frozen temperature
    std::vector<double> source;
};

struct PicardOutcome {
    TemperatureField u;          ///< accepted fixed point
    PotentialPair potentials;    ///< potentials at the accepted field
    std::vector<double> source;
    int iters = 0;
    std::vector<double> history;  ///< |J(u_k) - u_k|_inf per iteration
    double certificate = 0.0;     ///< |J(u*) - u*|_inf
    double relaxation = 1.0;      ///< relaxation in effect at exit
};

struct StepDiagnostics {
    double time = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double mean_u = 0.0;
    double sup_phis = 0.0;
    double sup_phie = 0.0;
    int picard_iters = 0;
    double picard_certificate = 0.0;
    std::vector<double> picard_history;
    bool truncation_active = false;
    double max_deviation = 0.0;  ///< max |u0 - u|
    double mean_sum = 0.0;
    double energy_residual = 0.0;
    double energy_scale = 0.0;
    double potential_residual = 0.0;
    bool kernel_saturated = false;
    bool positivity_violation = false;
    LinfRecord linf;
};

struct TStar {
    bool horizon = true;  ///< truncation never engaged up to the end of the run
    double time = 0.0;    ///< detected horizon, or the final time when horizon is true
};

struct SimulationResult {
    std::vector<double> times;
    std::vector<TemperatureField> temperatures;
    std::vector<PotentialPair> potentials;
    std::vector<StepDiagnostics> diagnostics;
    TStar t_star;
    TStar t_star_step;  ///< step-granularity value even when bisection refined t_star
    bool completed = true;
    std::string failure;
};

/// The outer fixed-point iteration coupling the potentials to the heat
/// equation. Holds references to mesh, parameters, and context.
class CoupledSolver {
public:
    CoupledSolver(const Mesh& mesh, const PhysicalParams& params, const ButlerVolmerContext& ctx,
                  SolverSettings settings);

    const SolverSettings& settings() const { return settings_; }

    /// Potentials at a frozen temperature per the configured tau mode.
    PotentialPair solve_potentials(std::span<const double> v, double time, const PotentialPair* warm = nullptr) const;

    /// J: potentials at v, source Q(v), then one implicit heat step from
    /// u_prev with Robin data from v.
    StepMapOutput apply_J(std::span<const double> v, const TemperatureField& u_prev, double dt,
                          const PotentialPair* warm = nullptr) const;

    /// Relaxed Picard iteration to the fixed point of the one-step map.
    /// Throws SolverError (stage Picard) with the residual history on failure.
    PicardOutcome picard_step(const TemperatureField& u_prev, double dt, const PotentialPair* warm = nullptr) const;

    SimulationResult run() const;

private:
    StepDiagnostics diagnose(const TemperatureField& u, const PotentialPair& pot, double q_norm) const;
    void run_per_step(SimulationResult& result) const;
    void run_trajectory(SimulationResult& result) const;
    void refine_tstar(SimulationResult& result) const;
    std::vector<double> step_times() const;

    const Mesh& mesh_;
    const PhysicalParams& params_;
    const ButlerVolmerContext& ctx_;
    SolverSettings settings_;
};

SimulationResult run_simulation(const Mesh& mesh, const PhysicalParams& params, const ButlerVolmerContext& ctx,
                                const SolverSettings& settings);

/// Largest snapshot time up to which every snapshot stays within eps of u0.
/// Asserts that the effective temperature equals u on that interval.
TStar detect_tstar(const SimulationResult& result, std::span<const double> u0, double eps);

}  // namespace tecell
