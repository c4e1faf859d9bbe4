#pragma once

#include "tecell/butler_volmer.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <span>
#include <vector>

namespace tecell {

/// Solid potential on the electrode cells and electrolyte potential on all
/// cells, with the metadata of the solve that produced them.
struct PotentialPair {
    std::vector<double> phis;  ///< electrode ordering
    std::vector<double> phie;
    double tau = 0.0;
    double delta = 1.0;
    double residual_norm = 0.0;
    int newton_iters = 0;
    int picard_iters = 0;  ///< map-B fallback iterations used
    double sup_phis = 0.0;
    double sup_phie = 0.0;
    double mean_sum = 0.0;  ///< sum over electrodes of phi_s |K| + sum over all cells of phi_e |K|
    double multiplier = 0.0;  ///< Lagrange multiplier of the zero-mean constraint (tau = 0 solves)
    KernelFlags flags;
    std::vector<double> residual_trace;

    static PotentialPair zeros(const Mesh& mesh);
};

struct NonlinearSettings {
    double tol = 1e-10;            ///< max-norm of the cell-integrated residual
    int max_iters = 60;
    double damping_floor = 9.5367431640625e-07;  ///< 2^-20
    int picard_fallback_iters = 400;
    int polish_iters = 3;          ///< extra Newton steps taken after tol is met while they still help
};

/// Cell-integrated source terms added to the right-hand side (manufactured solutions).
struct PotentialForcing {
    std::vector<double> solid;        ///< electrode ordering
    std::vector<double> electrolyte;
};

/// Finite-volume residual of the tau/delta-regularized potential system.
/// Layout: [solid rows in electrode ordering, electrolyte rows per cell].
std::vector<double> assemble_residual(const PotentialPair& pot, std::span<const double> u,
                                      const ButlerVolmerContext& ctx, double tau, double delta,
                                      const PotentialForcing* forcing = nullptr);

/// Unique solution for tau > 0 by damped Newton with a map-B Picard fallback.
PotentialPair solve_regularized(std::span<const double> u, double tau, double delta,
                                const ButlerVolmerContext& ctx, const NonlinearSettings& settings = {},
                                const PotentialPair* initial = nullptr);

/// tau = 0 solution normalized by the zero-mean constraint, enforced with one
/// Lagrange multiplier on the constant direction. Throws SolverError with
/// stage Constraint when the boundary current is incompatible.
PotentialPair solve_limit(std::span<const double> u, const ButlerVolmerContext& ctx,
                          const NonlinearSettings& settings = {}, double delta = 1.0,
                          const PotentialPair* initial = nullptr);

/// Solves along a decreasing tau sequence, warm-starting each solve from the
/// previous one. Returns one pair per tau.
std::vector<PotentialPair> tau_continuation(std::span<const double> u, std::span<const double> taus,
                                            double delta, const ButlerVolmerContext& ctx,
                                            const NonlinearSettings& settings = {});

/// One application of the map B: the linear problems with the kernel argument
/// frozen at the given pair. Requires tau > 0.
PotentialPair apply_B(const PotentialPair& frozen, std::span<const double> u, double tau, double delta,
                      const ButlerVolmerContext& ctx);

struct PotentialGradients {
    std::vector<Vec2> solid;        ///< electrode ordering
    std::vector<Vec2> electrolyte;
};

/// Green-Gauss cell gradients. Face values are distance-weighted averages on
/// interior faces and follow the Neumann data on boundary faces.
PotentialGradients potential_gradients(const PotentialPair& pot, const Mesh& mesh, const PhysicalParams& params);

/// Terms of the discrete energy identity obtained by testing the solid rows
/// with phi_s and the electrolyte rows with phi_e.
struct EnergyBalance {
    double grad_solid = 0.0;
    double grad_electrolyte = 0.0;
    double mass_solid = 0.0;
    double mass_electrolyte = 0.0;
    double kernel = 0.0;
    double drift = 0.0;      ///< delta * sum of d1 sigma_e w f . grad phi_e
    double boundary = 0.0;   ///< delta * sum of I phi_s over Gamma faces

    double residual() const;
    double scale() const;
};

EnergyBalance energy_balance(const PotentialPair& pot, std::span<const double> u, const ButlerVolmerContext& ctx);

/// |left side - right side| of the discrete energy identity.
double energy_identity_residual(const PotentialPair& pot, std::span<const double> u, const ButlerVolmerContext& ctx);

struct AprioriDiagnostics {
    double l2_phis = 0.0;
    double l2_phie = 0.0;
    double sup_phis = 0.0;
    double sup_phie = 0.0;
    double mean_sum = 0.0;
    double ifara_integral = 0.0;
};

AprioriDiagnostics apriori_diagnostics(const PotentialPair& pot, std::span<const double> u,
                                       const ButlerVolmerContext& ctx);

/// (|Omega| + |Omega'|) * max(1, sup phi_s, sup phi_e): the scale the
/// zero-mean identity is judged against.
double mean_sum_scale(const PotentialPair& pot, const Mesh& mesh);

/// Recomputes sup norms and the mean sum of a pair.
void refresh_norms(PotentialPair& pot, const Mesh& mesh);

}  // namespace tecell
