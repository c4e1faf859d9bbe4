#pragma once

#include "tecell/butler_volmer.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <span>
#include <vector>

namespace tecell {

struct TemperatureField {
    std::vector<double> values;
    double time = 0.0;
};

/// One implicit Euler step of (rho c_p) du/dt - div(k grad u) = q with the
/// Robin exchange k1 (w - T_a) on every outer-boundary face, where w is given
/// per face (entries on interior faces are ignored). Solved by sparse LU.
TemperatureField step_temperature(const TemperatureField& u_prev, std::span<const double> q,
                                  std::span<const double> w_boundary, double dt, const Mesh& mesh,
                                  const PhysicalParams& params);

/// Effective temperature on each outer-boundary face from the adjacent cell's
/// u and u0 (zero on interior faces).
std::vector<double> boundary_effective_temperature(std::span<const double> u, const ButlerVolmerContext& ctx);

/// Space-time L^r norm of a source field history, accumulated step by step.
class SourceNormAccumulator {
public:
    explicit SourceNormAccumulator(int dimension);

    void add(std::span<const double> q, const Mesh& mesh, double dt);
    double norm() const;
    double exponent() const { return exponent_; }

private:
    double exponent_;
    double sum_ = 0.0;
};

struct LinfRecord {
    double sup_u = 0.0;
    double bound_estimate = 0.0;  ///< q_norm + 2 |u0|_inf + 1
    double ratio = 0.0;           ///< sup_u / bound_estimate
    bool tripped = false;         ///< sup_u above the ceiling
};

/// sup |u| next to the structural shape of the parabolic L-infinity bound;
/// used as a divergence tripwire.
LinfRecord linf_monitor(std::span<const double> u, double q_norm, const PhysicalParams& params, double ceiling);

}  // namespace tecell
