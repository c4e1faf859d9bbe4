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

/// Hard cap on the number of unknowns the dense oracle accepts.
inline constexpr std::size_t kOracleMaxUnknowns = 64;

struct OracleSettings {
    double tol = 1e-11;       ///< max-norm of the oracle's own residual
    int max_iters = 100;
    double fd_step = 1e-7;    ///< central-difference step of the Jacobian
    /// Optional reordering of the unknowns [phi_s..., phi_e...]; entry i is the
    /// position of unknown i in the oracle's vector. Empty means identity.
    std::vector<std::size_t> permutation;
};

/// Dense, loop-by-loop reference solve of the potential system at frozen u.
/// Undamped Newton on a central-difference Jacobian; for tau = 0 the
/// zero-mean constraint is imposed by eliminating one unknown. Shares no
/// assembly code with the main solvers. Throws SolverError (stage Oracle) if
/// the system exceeds kOracleMaxUnknowns or Newton fails to converge.
PotentialPair brute_force_solve(const Mesh& mesh, std::span<const double> u, double tau, double delta,
                                const ButlerVolmerContext& ctx, const PhysicalParams& params,
                                const OracleSettings& settings = {});

/// Reference for one application of the step map: brute-force potentials at
/// v, cell-by-cell gradients and source, then a dense implicit heat step.
struct OracleStep {
    PotentialPair potentials;
    std::vector<double> source;
    std::vector<double> u;
};

OracleStep oracle_step(const Mesh& mesh, std::span<const double> v, std::span<const double> u_prev, double t_prev,
                       double dt, double tau, double delta, const ButlerVolmerContext& ctx,
                       const PhysicalParams& params, const OracleSettings& settings = {});

enum class DerivativeId {
    IfaraY2,    ///< d i_fara / d y2
    IfaraU,     ///< d i_fara / d u (band interior)
    SourceU,    ///< d Q / d u at a cell
    SourcePhis, ///< d Q / d phi_s at an electrode cell
    SourcePhie, ///< d Q / d phi_e at a cell
};

struct FdPoint {
    double u = 0.0;
    double y2 = 0.0;  ///< phi_s - phi_e; phi_e is taken as zero
    int cell = 0;     ///< global cell index
    Vec2 grad_phie{};
    Vec2 grad_phis{};
};

struct FdReport {
    double max_rel_error = 0.0;
    int evaluated = 0;
    int excluded = 0;  ///< samples within one step of the truncation kink
    std::vector<std::size_t> excluded_indices;
};

/// Worst relative difference between an analytic derivative and its central
/// difference over the sample points.
FdReport fd_check(DerivativeId id, std::span<const FdPoint> points, double step, const ButlerVolmerContext& ctx);

/// Least-squares slope of log(error) against log(h). Requires at least three
/// pairs, positive errors, and strictly decreasing h; throws
/// std::invalid_argument otherwise.
double convergence_rate(std::span<const double> errors, std::span<const double> hs);

struct OracleReport {
    std::string case_id;
    std::string quantity;
    std::vector<double> main_values;
    std::vector<double> oracle_values;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Compares two equally sized vectors in max norm against an absolute tolerance.
OracleReport compare(std::string case_id, std::string quantity, std::vector<double> main_values,
                     std::vector<double> oracle_values, double tolerance);

/// Plain-text table, one row per report.
std::string render_reports(std::span<const OracleReport> reports);

/// [phi_s..., phi_e...] in the solver's unknown ordering.
std::vector<double> stacked(const PotentialPair& pot);

}  // namespace tecell
