#include "tecell/elliptic.hpp"

#include "tecell/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace tecell {

PotentialPair PotentialPair::zeros(const Mesh& mesh)
{
    PotentialPair p;
    p.phis.assign(mesh.num_electrode_cells(), 0.0);
    p.phie.assign(mesh.num_cells(), 0.0);
    return p;
}

void refresh_norms(PotentialPair& pot, const Mesh& mesh)
{
    pot.sup_phis = 0.0;
    pot.sup_phie = 0.0;
    pot.mean_sum = 0.0;
    for (std::size_t e = 0; e < pot.phis.size(); ++e) {
        pot.sup_phis = std::max(pot.sup_phis, std::abs(pot.phis[e]));
        pot.mean_sum += pot.phis[e] * mesh.cell(mesh.electrode_cells()[e]).measure;
    }
    for (std::size_t c = 0; c < pot.phie.size(); ++c) {
        pot.sup_phie = std::max(pot.sup_phie, std::abs(pot.phie[c]));
        pot.mean_sum += pot.phie[c] * mesh.cell(static_cast<int>(c)).measure;
    }
}

double mean_sum_scale(const PotentialPair& pot, const Mesh& mesh)
{
    const double measure = region_measure(mesh, RegionSet::Whole) + region_measure(mesh, RegionSet::Electrodes);
    return measure * std::max({1.0, pot.sup_phis, pot.sup_phie});
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

/// Conductance |f| / (dL / sL + dR / sR) of an interior face.
double transmissibility(const Mesh& mesh, int face, double sigma_left, double sigma_right)
{
    const Face& f = mesh.face(face);
    const double dl = mesh.normal_distance(f.left, face);
    const double dr = mesh.normal_distance(f.right, face);
    return f.measure / (dl / sigma_left + dr / sigma_right);
}

struct Layout {
    std::size_t ne;
    std::size_t n;

    std::size_t solid(int e) const { return static_cast<std::size_t>(e); }
    std::size_t electrolyte(int c) const { return ne + static_cast<std::size_t>(c); }
    std::size_t size() const { return ne + n; }
};

Layout layout_of(const Mesh& mesh) { return {mesh.num_electrode_cells(), mesh.num_cells()}; }

void check_fields(const PotentialPair& pot, std::span<const double> u, const Mesh& mesh)
{
    if (pot.phis.size() != mesh.num_electrode_cells() || pot.phie.size() != mesh.num_cells() ||
        u.size() != mesh.num_cells())
        throw StructuralError("potential or temperature fields do not match the mesh");
}

struct AssemblyOptions {
    double tau = 0.0;
    double delta = 1.0;
    const PotentialForcing* forcing = nullptr;
    /// Evaluate the kernel at this pair instead of the unknowns (map B); the
    /// kernel then contributes nothing to the Jacobian.
    const PotentialPair* frozen = nullptr;
    bool jacobian = false;
};

struct Assembly {
    std::vector<double> residual;
    Triplets triplets;
    KernelFlags flags;
};

Assembly assemble(const PotentialPair& pot, std::span<const double> u, const ButlerVolmerContext& ctx,
                  const AssemblyOptions& opt)
{
    const Mesh& mesh = ctx.mesh();
    const PhysicalParams& p = ctx.params();
    check_fields(pot, u, mesh);
    const Layout L = layout_of(mesh);
    Assembly out;
    out.residual.assign(L.size(), 0.0);
    auto& r = out.residual;
    auto add = [&](std::size_t i, std::size_t j, double v) {
        if (opt.jacobian)
            out.triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    };

    // sigma_e d1 w per cell; its face average drives the f term.
    std::vector<double> drift_coeff(L.n);
    for (std::size_t c = 0; c < L.n; ++c)
        drift_coeff[c] = p.sigma_e[c] * p.d1 * ctx.effective_temperature(static_cast<int>(c), u[c]);

    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const int face = static_cast<int>(fi);
        const Face& f = mesh.face(face);
        if (f.on_boundary()) {
            const int e = mesh.electrode_index(f.left);
            if (e >= 0) {
                const double current = p.boundary_current(mesh, face);
                r[L.solid(e)] -= opt.delta * current * f.measure;
            }
            continue;
        }
        const auto cl = static_cast<std::size_t>(f.left);
        const auto cr = static_cast<std::size_t>(f.right);
        {
            const double t = transmissibility(mesh, face, p.sigma_e[cl], p.sigma_e[cr]);
            const double a_face = 0.5 * (drift_coeff[cl] + drift_coeff[cr]);
            const double flux =
                -t * (pot.phie[cr] - pot.phie[cl]) + opt.delta * a_face * p.f_normal[fi] * f.measure;
            const std::size_t il = L.electrolyte(f.left);
            const std::size_t ir = L.electrolyte(f.right);
            r[il] += flux;
            r[ir] -= flux;
            add(il, il, t);
            add(il, ir, -t);
            add(ir, il, -t);
            add(ir, ir, t);
        }
        const int el = mesh.electrode_index(f.left);
        const int er = mesh.electrode_index(f.right);
        if (el >= 0 && er >= 0) {
            const auto sl = static_cast<std::size_t>(el);
            const auto sr = static_cast<std::size_t>(er);
            const double t = transmissibility(mesh, face, p.sigma_s[sl], p.sigma_s[sr]);
            const double flux = -t * (pot.phis[sr] - pot.phis[sl]);
            r[L.solid(el)] += flux;
            r[L.solid(er)] -= flux;
            add(L.solid(el), L.solid(el), t);
            add(L.solid(el), L.solid(er), -t);
            add(L.solid(er), L.solid(el), -t);
            add(L.solid(er), L.solid(er), t);
        }
    }

    const double floor = opt.delta * p.A_s * ctx.coercivity_floor();
    for (std::size_t c = 0; c < L.n; ++c) {
        const int cell = static_cast<int>(c);
        const double measure = mesh.cell(cell).measure;
        const std::size_t ie = L.electrolyte(cell);
        r[ie] += opt.tau * pot.phie[c] * measure;
        add(ie, ie, opt.tau * measure);
        const int e = mesh.electrode_index(cell);
        if (e < 0)
            continue;
        const auto ei = static_cast<std::size_t>(e);
        const std::size_t is = L.solid(e);
        r[is] += opt.tau * pot.phis[ei] * measure;
        add(is, is, opt.tau * measure);

        const PotentialPair& at = opt.frozen ? *opt.frozen : pot;
        const double y2 = at.phis[ei] - at.phie[c];
        KernelFlags flags;
        const double current = opt.delta * p.A_s * i_fara_eps(u[c], y2, cell, ctx, &flags) * measure;
        r[is] += current;
        r[ie] -= current;
        if (opt.jacobian && !opt.frozen) {
            const double slope = opt.delta * p.A_s * d_ifara_dy2(u[c], y2, cell, ctx, &flags) * measure;
            if (!flags.saturated && slope < floor * measure * (1.0 - 1e-12)) {
                std::ostringstream msg;
                msg << "kernel coupling " << slope << " below coercivity floor " << floor * measure << " at cell "
                    << cell;
                throw std::logic_error(msg.str());
            }
            add(is, is, slope);
            add(is, ie, -slope);
            add(ie, is, -slope);
            add(ie, ie, slope);
        }
        out.flags.merge(flags);
    }

    if (opt.forcing) {
        if (opt.forcing->solid.size() != L.ne || opt.forcing->electrolyte.size() != L.n)
            throw StructuralError("forcing does not match the mesh");
        for (std::size_t e = 0; e < L.ne; ++e)
            r[e] -= opt.forcing->solid[e];
        for (std::size_t c = 0; c < L.n; ++c)
            r[L.ne + c] -= opt.forcing->electrolyte[c];
    }
    return out;
}

double total_measure(const Mesh& mesh)
{
    return region_measure(mesh, RegionSet::Whole) + region_measure(mesh, RegionSet::Electrodes);
}

double boundary_current_total(const Mesh& mesh, const PhysicalParams& p)
{
    double sum = 0.0;
    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const Face& f = mesh.face(static_cast<int>(fi));
        if (f.on_boundary() && mesh.electrode_index(f.left) >= 0)
            sum += p.boundary_current(mesh, static_cast<int>(fi)) * f.measure;
    }
    return sum;
}

/// Nonlinear system in the potentials, optionally bordered by the zero-mean
/// constraint (one extra unknown, the multiplier, and one extra row).
class PotentialSystem {
public:
    PotentialSystem(std::span<const double> u, const ButlerVolmerContext& ctx, double tau, double delta,
                    bool constrained, const PotentialForcing* forcing)
        : u_(u), ctx_(ctx), tau_(tau), delta_(delta), constrained_(constrained), forcing_(forcing),
          layout_(layout_of(ctx.mesh()))
    {
        for (int c : ctx.mesh().electrode_cells())
            measures_.push_back(ctx.mesh().cell(c).measure);
        for (const Cell& c : ctx.mesh().cells())
            measures_.push_back(c.measure);
    }

    std::size_t size() const { return layout_.size() + (constrained_ ? 1 : 0); }

    PotentialPair unpack(const Eigen::VectorXd& x) const
    {
        PotentialPair p;
        p.phis.assign(x.data(), x.data() + layout_.ne);
        p.phie.assign(x.data() + layout_.ne, x.data() + layout_.size());
        p.multiplier = constrained_ ? x[static_cast<Eigen::Index>(layout_.size())] : 0.0;
        return p;
    }

    Eigen::VectorXd pack(const PotentialPair& p) const
    {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
        for (std::size_t e = 0; e < layout_.ne; ++e)
            x[static_cast<Eigen::Index>(e)] = p.phis[e];
        for (std::size_t c = 0; c < layout_.n; ++c)
            x[static_cast<Eigen::Index>(layout_.ne + c)] = p.phie[c];
        if (constrained_)
            x[static_cast<Eigen::Index>(layout_.size())] = p.multiplier;
        return x;
    }

    /// Residual (and optionally the Jacobian) at x.
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x, Eigen::SparseMatrix<double>* jac, KernelFlags* flags) const
    {
        const PotentialPair p = unpack(x);
        AssemblyOptions opt;
        opt.tau = tau_;
        opt.delta = delta_;
        opt.forcing = forcing_;
        opt.jacobian = jac != nullptr;
        Assembly a = assemble(p, u_, ctx_, opt);
        if (flags)
            flags->merge(a.flags);
        Eigen::VectorXd r(static_cast<Eigen::Index>(size()));
        for (std::size_t i = 0; i < layout_.size(); ++i)
            r[static_cast<Eigen::Index>(i)] = a.residual[i];
        if (constrained_) {
            const auto last = static_cast<Eigen::Index>(layout_.size());
            double mean = 0.0;
            for (std::size_t i = 0; i < layout_.size(); ++i) {
                r[static_cast<Eigen::Index>(i)] += p.multiplier;
                mean += measures_[i] * x[static_cast<Eigen::Index>(i)];
            }
            r[last] = mean;
            if (jac) {
                for (std::size_t i = 0; i < layout_.size(); ++i) {
                    a.triplets.emplace_back(static_cast<int>(i), static_cast<int>(last), 1.0);
                    a.triplets.emplace_back(static_cast<int>(last), static_cast<int>(i), measures_[i]);
                }
            }
        }
        if (jac) {
            jac->resize(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
            jac->setFromTriplets(a.triplets.begin(), a.triplets.end());
        }
        return r;
    }

    /// Exact update along the constant direction, using the telescoped sum of
    /// all rows: tau * mean_sum - delta * (boundary current) - (forcing total).
    void correct_constant_mode(Eigen::VectorXd& x) const
    {
        double mean = 0.0;
        for (std::size_t i = 0; i < layout_.size(); ++i)
            mean += measures_[i] * x[static_cast<Eigen::Index>(i)];
        double shift = 0.0;
        const double measure = total_measure(ctx_.mesh());
        if (constrained_) {
            shift = -mean / measure;
        } else {
            double forcing_total = 0.0;
            if (forcing_) {
                for (double v : forcing_->solid)
                    forcing_total += v;
                for (double v : forcing_->electrolyte)
                    forcing_total += v;
            }
            const double row_sum =
                tau_ * mean - delta_ * boundary_current_total(ctx_.mesh(), ctx_.params()) - forcing_total;
            shift = -row_sum / (tau_ * measure);
        }
        for (std::size_t i = 0; i < layout_.size(); ++i)
            x[static_cast<Eigen::Index>(i)] += shift;
    }

    double tau() const { return tau_; }
    double delta() const { return delta_; }
    bool constrained() const { return constrained_; }
    std::span<const double> u() const { return u_; }
    const ButlerVolmerContext& ctx() const { return ctx_; }

private:
    std::span<const double> u_;
    const ButlerVolmerContext& ctx_;
    double tau_;
    double delta_;
    bool constrained_;
    const PotentialForcing* forcing_;
    Layout layout_;
    std::vector<double> measures_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

std::optional<Eigen::VectorXd> linear_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        return std::nullopt;
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
        return std::nullopt;
    return x;
}

/// Map-B Picard sweeps starting from x; returns the last iterate.
Eigen::VectorXd picard_fallback(const PotentialSystem& sys, Eigen::VectorXd x, int max_iters, double tol,
                                std::vector<double>& trace, int& iters)
{
    for (int it = 0; it < max_iters; ++it) {
        const PotentialPair current = sys.unpack(x);
        const PotentialPair next = apply_B(current, sys.u(), sys.tau(), sys.delta(), sys.ctx());
        x = sys.pack(next);
        ++iters;
        const double res = inf_norm(sys.evaluate(x, nullptr, nullptr));
        trace.push_back(res);
        if (res <= tol)
            break;
    }
    return x;
}

PotentialPair newton_solve(const PotentialSystem& sys, const NonlinearSettings& settings, Eigen::VectorXd x)
{
    std::vector<double> trace;
    KernelFlags flags;
    Eigen::SparseMatrix<double> jac;
    Eigen::VectorXd r = sys.evaluate(x, &jac, nullptr);
    double res = inf_norm(r);
    trace.push_back(res);
    int iters = 0;
    int picard_iters = 0;
    bool fallback_used = false;

    while (!(res <= settings.tol)) {
        if (iters >= settings.max_iters)
            throw SolverError(SolverStage::Potential, "Newton did not converge within the iteration limit", trace);
        const auto step = linear_solve(jac, -r);
        bool accepted = false;
        if (step) {
            for (double lambda = 1.0; lambda >= settings.damping_floor; lambda *= 0.5) {
                const Eigen::VectorXd trial = x + lambda * *step;
                const Eigen::VectorXd r_trial = sys.evaluate(trial, nullptr, nullptr);
                const double res_trial = inf_norm(r_trial);
                if (std::isfinite(res_trial) && res_trial <= (1.0 - 1e-4 * lambda) * res) {
                    x = trial;
                    accepted = true;
                    break;
                }
            }
        }
        ++iters;
        if (!accepted) {
            if (sys.tau() > 0.0 && !fallback_used) {
                fallback_used = true;
                x = picard_fallback(sys, x, settings.picard_fallback_iters, settings.tol, trace, picard_iters);
            } else {
                throw SolverError(SolverStage::Potential, "damped Newton stalled at the damping floor", trace);
            }
        }
        r = sys.evaluate(x, &jac, nullptr);
        res = inf_norm(r);
        trace.push_back(res);
    }

    // Polish while Newton still reduces the residual.
    for (int k = 0; k < settings.polish_iters && res > 0.0; ++k) {
        const auto step = linear_solve(jac, -r);
        if (!step)
            break;
        const Eigen::VectorXd trial = x + *step;
        Eigen::SparseMatrix<double> jac_trial;
        const Eigen::VectorXd r_trial = sys.evaluate(trial, &jac_trial, nullptr);
        const double res_trial = inf_norm(r_trial);
        if (!(res_trial < res))
            break;
        x = trial;
        r = r_trial;
        jac = std::move(jac_trial);
        res = res_trial;
        ++iters;
        trace.push_back(res);
    }

    Eigen::VectorXd corrected = x;
    sys.correct_constant_mode(corrected);
    const Eigen::VectorXd r_corrected = sys.evaluate(corrected, nullptr, nullptr);
    if (inf_norm(r_corrected) <= std::max(res, settings.tol)) {
        x = corrected;
        r = r_corrected;
        res = inf_norm(r);
    }
    sys.evaluate(x, nullptr, &flags);

    PotentialPair out = sys.unpack(x);
    out.tau = sys.tau();
    out.delta = sys.delta();
    out.residual_norm = res;
    out.newton_iters = iters;
    out.picard_iters = picard_iters;
    out.flags = flags;
    out.residual_trace = std::move(trace);
    refresh_norms(out, sys.ctx().mesh());
    return out;
}

void check_delta(double delta)
{
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0, 1]");
}

}  // namespace

std::vector<double> assemble_residual(const PotentialPair& pot, std::span<const double> u,
                                      const ButlerVolmerContext& ctx, double tau, double delta,
                                      const PotentialForcing* forcing)
{
    AssemblyOptions opt;
    opt.tau = tau;
    opt.delta = delta;
    opt.forcing = forcing;
    return assemble(pot, u, ctx, opt).residual;
}

PotentialPair apply_B(const PotentialPair& frozen, std::span<const double> u, double tau, double delta,
                      const ButlerVolmerContext& ctx)
{
    if (!(tau > 0.0))
        throw std::invalid_argument("map B needs tau > 0");
    const Mesh& mesh = ctx.mesh();
    PotentialPair zero = PotentialPair::zeros(mesh);
    AssemblyOptions opt;
    opt.tau = tau;
    opt.delta = delta;
    opt.frozen = &frozen;
    opt.jacobian = true;
    // The frozen-kernel residual is affine: R(x) = A x + R(0).
    Assembly a = assemble(zero, u, ctx, opt);
    const Layout L = layout_of(mesh);
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(L.size()), static_cast<Eigen::Index>(L.size()));
    A.setFromTriplets(a.triplets.begin(), a.triplets.end());
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(L.size()));
    for (std::size_t i = 0; i < L.size(); ++i)
        rhs[static_cast<Eigen::Index>(i)] = -a.residual[i];
    const auto x = linear_solve(A, rhs);
    if (!x)
        throw SolverError(SolverStage::Potential, "map B linear solve failed");
    PotentialPair out;
    out.phis.assign(x->data(), x->data() + L.ne);
    out.phie.assign(x->data() + L.ne, x->data() + L.size());
    out.tau = tau;
    out.delta = delta;
    out.flags = a.flags;
    refresh_norms(out, mesh);
    return out;
}

PotentialPair solve_regularized(std::span<const double> u, double tau, double delta, const ButlerVolmerContext& ctx,
                                const NonlinearSettings& settings, const PotentialPair* initial)
{
    if (!(tau > 0.0))
        throw std::invalid_argument("solve_regularized needs tau > 0");
    check_delta(delta);
    PotentialSystem sys(u, ctx, tau, delta, false, nullptr);
    const PotentialPair start = initial ? *initial : PotentialPair::zeros(ctx.mesh());
    check_fields(start, u, ctx.mesh());
    return newton_solve(sys, settings, sys.pack(start));
}

PotentialPair solve_limit(std::span<const double> u, const ButlerVolmerContext& ctx, const NonlinearSettings& settings,
                          double delta, const PotentialPair* initial)
{
    check_delta(delta);
    PotentialSystem sys(u, ctx, 0.0, delta, true, nullptr);
    PotentialPair start = initial ? *initial : PotentialPair::zeros(ctx.mesh());
    check_fields(start, u, ctx.mesh());
    start.multiplier = 0.0;
    PotentialPair out;
    try {
        out = newton_solve(sys, settings, sys.pack(start));
    } catch (const SolverError& err) {
        throw SolverError(SolverStage::Constraint,
                          std::string("constrained solve failed (check boundary current compatibility): ") + err.what(),
                          err.trace());
    }
    // At a compatible solution the multiplier vanishes; a nonzero one means the
    // boundary current does not integrate to zero.
    const double n = static_cast<double>(ctx.mesh().num_cells() + ctx.mesh().num_electrode_cells());
    if (std::abs(out.multiplier) * n > std::max(settings.tol, 1e-12) * 10.0) {
        std::ostringstream msg;
        msg << "zero-mean constraint multiplier " << out.multiplier
            << " is not zero: boundary current is incompatible";
        throw SolverError(SolverStage::Constraint, msg.str(), out.residual_trace);
    }
    return out;
}

std::vector<PotentialPair> tau_continuation(std::span<const double> u, std::span<const double> taus, double delta,
                                            const ButlerVolmerContext& ctx, const NonlinearSettings& settings)
{
    std::vector<PotentialPair> out;
    for (double tau : taus) {
        const PotentialPair* warm = out.empty() ? nullptr : &out.back();
        out.push_back(solve_regularized(u, tau, delta, ctx, settings, warm));
    }
    return out;
}

PotentialGradients potential_gradients(const PotentialPair& pot, const Mesh& mesh, const PhysicalParams& params)
{
    PotentialGradients g;
    g.solid.assign(mesh.num_electrode_cells(), Vec2{0.0, 0.0});
    g.electrolyte.assign(mesh.num_cells(), Vec2{0.0, 0.0});
    auto accumulate = [](Vec2& grad, double value, const Face& f) {
        grad[0] += value * f.normal[0] * f.measure;
        grad[1] += value * f.normal[1] * f.measure;
    };

    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const int face = static_cast<int>(fi);
        const Face& f = mesh.face(face);
        const auto cl = static_cast<std::size_t>(f.left);
        const int el = mesh.electrode_index(f.left);
        if (f.on_boundary()) {
            accumulate(g.electrolyte[cl], pot.phie[cl], f);
            if (el >= 0) {
                const auto e = static_cast<std::size_t>(el);
                const double dn = pot.delta * params.boundary_current(mesh, face) / params.sigma_s[e];
                accumulate(g.solid[e], pot.phis[e] + dn * mesh.normal_distance(f.left, face), f);
            }
            continue;
        }
        const auto cr = static_cast<std::size_t>(f.right);
        const double dl = mesh.normal_distance(f.left, face);
        const double dr = mesh.normal_distance(f.right, face);
        const double we = (dr * pot.phie[cl] + dl * pot.phie[cr]) / (dl + dr);
        accumulate(g.electrolyte[cl], we, f);
        accumulate(g.electrolyte[cr], -we, f);

        const int er = mesh.electrode_index(f.right);
        if (el >= 0 && er >= 0) {
            const auto sl = static_cast<std::size_t>(el);
            const auto sr = static_cast<std::size_t>(er);
            const double ws = (dr * pot.phis[sl] + dl * pot.phis[sr]) / (dl + dr);
            accumulate(g.solid[sl], ws, f);
            accumulate(g.solid[sr], -ws, f);
        } else if (el >= 0) {
            // zero-flux separator interface seen from the left electrode cell
            accumulate(g.solid[static_cast<std::size_t>(el)], pot.phis[static_cast<std::size_t>(el)], f);
        } else if (er >= 0) {
            accumulate(g.solid[static_cast<std::size_t>(er)], -pot.phis[static_cast<std::size_t>(er)], f);
        }
    }
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const double m = mesh.cell(static_cast<int>(c)).measure;
        g.electrolyte[c][0] /= m;
        g.electrolyte[c][1] /= m;
        const int e = mesh.electrode_index(static_cast<int>(c));
        if (e >= 0) {
            g.solid[static_cast<std::size_t>(e)][0] /= m;
            g.solid[static_cast<std::size_t>(e)][1] /= m;
        }
    }
    return g;
}

double EnergyBalance::residual() const
{
    return std::abs(grad_solid + grad_electrolyte + mass_solid + mass_electrolyte + kernel - drift - boundary);
}

double EnergyBalance::scale() const
{
    return std::max({std::abs(grad_solid), std::abs(grad_electrolyte), std::abs(mass_solid),
                     std::abs(mass_electrolyte), std::abs(kernel), std::abs(drift), std::abs(boundary)});
}

EnergyBalance energy_balance(const PotentialPair& pot, std::span<const double> u, const ButlerVolmerContext& ctx)
{
    const Mesh& mesh = ctx.mesh();
    const PhysicalParams& p = ctx.params();
    check_fields(pot, u, mesh);
    EnergyBalance b;
    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const int face = static_cast<int>(fi);
        const Face& f = mesh.face(face);
        const auto cl = static_cast<std::size_t>(f.left);
        const int el = mesh.electrode_index(f.left);
        if (f.on_boundary()) {
            if (el >= 0)
                b.boundary += pot.delta * p.boundary_current(mesh, face) * f.measure * pot.phis[static_cast<std::size_t>(el)];
            continue;
        }
        const auto cr = static_cast<std::size_t>(f.right);
        const double jump_e = pot.phie[cr] - pot.phie[cl];
        b.grad_electrolyte += transmissibility(mesh, face, p.sigma_e[cl], p.sigma_e[cr]) * jump_e * jump_e;
        const double a_face = 0.5 * p.d1 *
                              (p.sigma_e[cl] * ctx.effective_temperature(f.left, u[cl]) +
                               p.sigma_e[cr] * ctx.effective_temperature(f.right, u[cr]));
        b.drift += pot.delta * a_face * p.f_normal[fi] * f.measure * jump_e;
        const int er = mesh.electrode_index(f.right);
        if (el >= 0 && er >= 0) {
            const auto sl = static_cast<std::size_t>(el);
            const auto sr = static_cast<std::size_t>(er);
            const double jump_s = pot.phis[sr] - pot.phis[sl];
            b.grad_solid += transmissibility(mesh, face, p.sigma_s[sl], p.sigma_s[sr]) * jump_s * jump_s;
        }
    }
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const int cell = static_cast<int>(c);
        const double m = mesh.cell(cell).measure;
        b.mass_electrolyte += pot.tau * pot.phie[c] * pot.phie[c] * m;
        const int e = mesh.electrode_index(cell);
        if (e < 0)
            continue;
        const auto ei = static_cast<std::size_t>(e);
        b.mass_solid += pot.tau * pot.phis[ei] * pot.phis[ei] * m;
        const double y2 = pot.phis[ei] - pot.phie[c];
        b.kernel += pot.delta * p.A_s * i_fara_eps(u[c], y2, cell, ctx) * y2 * m;
    }
    return b;
}

double energy_identity_residual(const PotentialPair& pot, std::span<const double> u, const ButlerVolmerContext& ctx)
{
    return energy_balance(pot, u, ctx).residual();
}

AprioriDiagnostics apriori_diagnostics(const PotentialPair& pot, std::span<const double> u,
                                       const ButlerVolmerContext& ctx)
{
    const Mesh& mesh = ctx.mesh();
    check_fields(pot, u, mesh);
    AprioriDiagnostics d;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const int cell = static_cast<int>(c);
        const double m = mesh.cell(cell).measure;
        d.l2_phie += pot.phie[c] * pot.phie[c] * m;
        d.sup_phie = std::max(d.sup_phie, std::abs(pot.phie[c]));
        d.mean_sum += pot.phie[c] * m;
        const int e = mesh.electrode_index(cell);
        if (e < 0)
            continue;
        const auto ei = static_cast<std::size_t>(e);
        d.l2_phis += pot.phis[ei] * pot.phis[ei] * m;
        d.sup_phis = std::max(d.sup_phis, std::abs(pot.phis[ei]));
        d.mean_sum += pot.phis[ei] * m;
        d.ifara_integral += i_fara_eps(u[c], pot.phis[ei] - pot.phie[c], cell, ctx) * m;
    }
    d.l2_phis = std::sqrt(d.l2_phis);
    d.l2_phie = std::sqrt(d.l2_phie);
    return d;
}

}  // namespace tecell
