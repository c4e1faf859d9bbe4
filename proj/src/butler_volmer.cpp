#include "tecell/butler_volmer.hpp"

#include "tecell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tecell {

double theta_eps(double s, double eps)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("eps must be positive");
    if (s > eps)
        return eps;
    if (s < -eps)
        return -eps;
    return s;
}

double effective_temperature(double u, double u0, double eps)
{
    const double d = u0 - u;
    if (std::abs(d) <= eps)
        return u;
    return d > 0.0 ? u0 - eps : u0 + eps;
}

ButlerVolmerContext::ButlerVolmerContext(const Mesh& mesh, const PhysicalParams& params, double eps,
                                         Truncation truncation)
    : mesh_(&mesh), params_(&params), U_(params.U), eps_(eps), truncation_(truncation)
{
    const EpsilonBounds bounds = epsilon_bounds(params.u0);
    if (!bounds.admits(eps))
        throw std::invalid_argument("eps must lie in (0, L0) with L0 = " + std::to_string(bounds.L0));
    L0_ = bounds.L0;
    const double u0_max = *std::max_element(params.u0.begin(), params.u0.end());
    c0_ = 2.0 * params.g0 * params.alpha / (L0_ - eps_);
    floor_ = 2.0 * params.g0 * params.alpha / (u0_max + eps_);
    if (params.u0.size() != mesh.num_cells())
        throw StructuralError("u0 does not match the mesh");
}

double ButlerVolmerContext::effective_temperature(int cell, double u) const
{
    if (truncation_ == Truncation::Off)
        return u;
    return tecell::effective_temperature(u, params_->u0[static_cast<std::size_t>(cell)], eps_);
}

bool ButlerVolmerContext::clamped(int cell, double u) const
{
    return std::abs(params_->u0[static_cast<std::size_t>(cell)] - u) > eps_;
}

ButlerVolmerContext ButlerVolmerContext::with_eps(double eps) const
{
    ButlerVolmerContext copy(*mesh_, *params_, eps, truncation_);
    copy.U_ = U_;
    return copy;
}

ButlerVolmerContext ButlerVolmerContext::untruncated() const
{
    ButlerVolmerContext copy = *this;
    copy.truncation_ = Truncation::Off;
    return copy;
}

ButlerVolmerContext ButlerVolmerContext::at_time(double t) const
{
    ButlerVolmerContext copy = *this;
    copy.U_ = params_->U_at(t);
    return copy;
}

namespace {

struct KernelPoint {
    double g1;
    double w;
    double x;  ///< capped exponent alpha (y2 - U) / w
};

KernelPoint kernel_point(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags)
{
    const int e = ctx.mesh().electrode_index(cell);
    if (e < 0)
        throw StructuralError("Butler-Volmer kernel evaluated on separator cell " + std::to_string(cell));
    const auto ei = static_cast<std::size_t>(e);
    const PhysicalParams& p = ctx.params();
    const double w = ctx.effective_temperature(cell, u);
    double x = p.alpha * (y2 - ctx.U()[ei]) / w;
    if (std::abs(x) > kExponentCap || std::isnan(x)) {
        x = std::copysign(kExponentCap, x);
        if (flags)
            flags->saturated = true;
    }
    return {p.g1[ei], w, x};
}

}  // namespace

double i_fara_eps(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags)
{
    const KernelPoint k = kernel_point(u, y2, cell, ctx, flags);
    // e^x - e^-x written as (e^x - 1) - (e^-x - 1) to avoid cancellation near x = 0.
    return k.g1 * (std::expm1(k.x) - std::expm1(-k.x));
}

double i_fara_sinh_form(double u, double y2, int cell, const ButlerVolmerContext& ctx)
{
    const KernelPoint k = kernel_point(u, y2, cell, ctx, nullptr);
    return 2.0 * k.g1 * std::sinh(k.x);
}

double d_ifara_dy2(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags)
{
    const KernelPoint k = kernel_point(u, y2, cell, ctx, flags);
    return k.g1 * ctx.params().alpha / k.w * (std::exp(k.x) + std::exp(-k.x));
}

double d_ifara_du(double u, double y2, int cell, const ButlerVolmerContext& ctx, KernelFlags* flags)
{
    const KernelPoint k = kernel_point(u, y2, cell, ctx, flags);
    double dw_du = 1.0;
    if (ctx.truncation() == Truncation::On) {
        const double gap = std::abs(ctx.params().u0[static_cast<std::size_t>(cell)] - u);
        if (gap > ctx.eps())
            dw_du = 0.0;
        else if (gap == ctx.eps() && flags)
            flags->at_kink = true;
    }
    if (dw_du == 0.0)
        return 0.0;
    // i = 2 g1 sinh(x), x = alpha (y2 - U) / w  =>  di/dw = -2 g1 cosh(x) x / w
    return -2.0 * k.g1 * std::cosh(k.x) * k.x / k.w * dw_du;
}

std::vector<double> source_Q_eps(std::span<const double> u, std::span<const double> phis,
                                 std::span<const double> phie, std::span<const Vec2> grad_phis,
                                 std::span<const Vec2> grad_phie, const ButlerVolmerContext& ctx,
                                 KernelFlags* flags)
{
    const Mesh& mesh = ctx.mesh();
    const PhysicalParams& p = ctx.params();
    const std::size_t n = mesh.num_cells();
    const std::size_t ne = mesh.num_electrode_cells();
    if (u.size() != n || phie.size() != n || grad_phie.size() != n || phis.size() != ne || grad_phis.size() != ne)
        throw StructuralError("source_Q_eps: field sizes do not match the mesh");

    std::vector<double> q(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const int cell = static_cast<int>(c);
        const double w = ctx.effective_temperature(cell, u[c]);
        const Vec2& ge = grad_phie[c];
        double value = p.sigma_e[c] * dot(ge, ge) + p.d1 * p.sigma_e[c] * w * dot(p.f_cell[c], ge);
        const int e = mesh.electrode_index(cell);
        if (e >= 0) {
            const auto ei = static_cast<std::size_t>(e);
            const double y2 = phis[ei] - phie[c];
            const double factor = p.heat_source_form == HeatSourceForm::Reduced ? y2 : y2 - ctx.U()[ei];
            const Vec2& gs = grad_phis[ei];
            value += p.A_s * i_fara_eps(u[c], y2, cell, ctx, flags) * factor + p.sigma_s[ei] * dot(gs, gs);
        }
        q[c] = value;
    }
    return q;
}

}  // namespace tecell
