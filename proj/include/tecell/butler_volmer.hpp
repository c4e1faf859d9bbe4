#pragma once

#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <span>
#include <vector>

namespace tecell {

/// Magnitude cap on the exponent alpha (y2 - U) / w. Beyond it the kernel
/// saturates and KernelFlags::saturated is raised.
inline constexpr double kExponentCap = 350.0;

/// Clamp of s to [-eps, eps]. Throws std::invalid_argument for eps <= 0.
double theta_eps(double s, double eps);

/// w = u0 - theta_eps(u0 - u). Returns u itself (bit-for-bit) whenever
/// |u0 - u| <= eps, otherwise u0 -/+ eps.
double effective_temperature(double u, double u0, double eps);

struct KernelFlags {
    bool saturated = false;  ///< exponent cap hit
    bool at_kink = false;    ///< |u0 - u| == eps; temperature derivative is one-sided

    void merge(const KernelFlags& other)
    {
        saturated = saturated || other.saturated;
        at_kink = at_kink || other.at_kink;
    }
};

enum class Truncation { On, Off };

/// Truncation radius, L0 = min u0, and the coupling data the kernel reads.
///
/// Holds non-owning references to the mesh and parameters; both must outlive
/// the context. With Truncation::Off the effective temperature is the raw
/// temperature, which is how results are re-checked against the untruncated
/// system.
class ButlerVolmerContext {
public:
    /// Throws std::invalid_argument unless 0 < eps < L0.
    ButlerVolmerContext(const Mesh& mesh, const PhysicalParams& params, double eps,
                        Truncation truncation = Truncation::On);

    double eps() const { return eps_; }
    double L0() const { return L0_; }
    /// 2 g0 alpha / (L0 - eps), the constant the existence analysis quotes.
    double c0() const { return c0_; }
    /// 2 g0 alpha / (max u0 + eps): a lower bound on the y2-derivative that
    /// holds at every point, since w never exceeds max u0 + eps.
    double coercivity_floor() const { return floor_; }
    Truncation truncation() const { return truncation_; }

    const Mesh& mesh() const { return *mesh_; }
    const PhysicalParams& params() const { return *params_; }
    std::span<const double> U() const { return U_; }

    /// Effective temperature of a cell carrying temperature u.
    double effective_temperature(int cell, double u) const;
    /// True when |u0 - u| > eps, i.e. the clamp is engaged.
    bool clamped(int cell, double u) const;

    ButlerVolmerContext with_eps(double eps) const;
    ButlerVolmerContext untruncated() const;
    /// Context using the open-circuit potential scheduled at time t.
    ButlerVolmerContext at_time(double t) const;

private:
    const Mesh* mesh_;
    const PhysicalParams* params_;
    std::span<const double> U_;
    double eps_;
    double L0_;
    double c0_;
    double floor_;
    Truncation truncation_;
};

/// Truncated Butler-Volmer current g1 [e^{a(y2-U)/w} - e^{-a(y2-U)/w}] at a
/// cell of the electrodes (global cell index). Throws StructuralError on
/// separator cells.
double i_fara_eps(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags = nullptr);

/// Closed form 2 g1 sinh(alpha (y2 - U) / w); reference for i_fara_eps.
double i_fara_sinh_form(double u, double y2, int cell, const ButlerVolmerContext& ctx);

/// d i_fara / d y2 = 2 g1 alpha cosh(alpha (y2 - U) / w) / w.
double d_ifara_dy2(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags = nullptr);

/// d i_fara / d u through w. Zero outside the truncation band; at the kink
/// the band-interior one-sided value is returned and flags->at_kink is set.
double d_ifara_du(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags = nullptr);

/// Heat source on every cell of the mesh:
///   [A_s i (phi_s - phi_e) + sigma_s |grad phi_s|^2] on the electrodes
///   + sigma_e |grad phi_e|^2 + d1 sigma_e w f . grad phi_e.
/// phis and grad_phis use the electrode ordering.
std::vector<double> source_Q_eps(std::span<const double> u, std::span<const double> phis,
                                 std::span<const double> phie, std::span<const Vec2> grad_phis,
                                 std::span<const Vec2> grad_phie, const ButlerVolmerContext& ctx,
                                 KernelFlags* flags = nullptr);

}  // namespace tecell
