#include "tecell/oracle.hpp"

#include "tecell/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tecell {

namespace {

struct Neighbor {
    int face;
    int other;     ///< -1 on the outer boundary
    double sign;   ///< +1 when the face normal points out of the cell
};

std::vector<Neighbor> neighbors_of(const Mesh& mesh, int cell)
{
    std::vector<Neighbor> out;
    for (int fi : mesh.cell_faces(cell)) {
        const Face& f = mesh.face(fi);
        if (f.left == cell)
            out.push_back({fi, f.right, 1.0});
        else
            out.push_back({fi, f.left, -1.0});
    }
    return out;
}

double clamp_band(double u, double u0, double eps, Truncation truncation)
{
    if (truncation == Truncation::Off)
        return u;
    return u0 - std::clamp(u0 - u, -eps, eps);
}

double sinh_kernel(double g1, double alpha, double y2, double U, double w)
{
    return 2.0 * g1 * std::sinh(alpha * (y2 - U) / w);
}

/// Residual of the potential system written cell by cell.
class DenseProblem {
public:
    DenseProblem(const Mesh& mesh, std::span<const double> u, double tau, double delta,
                 const ButlerVolmerContext& ctx, const PhysicalParams& p)
        : mesh_(mesh), u_(u), tau_(tau), delta_(delta), ctx_(ctx), p_(p)
    {
        ne_ = 0;
        solid_slot_.assign(mesh.num_cells(), -1);
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            if (is_electrode(mesh.cell(static_cast<int>(c)).region))
                solid_slot_[c] = ne_++;
        }
        n_ = static_cast<int>(mesh.num_cells());
        w_.resize(mesh.num_cells());
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
            w_[c] = clamp_band(u[c], p.u0[c], ctx.eps(), ctx.truncation());
    }

    int unknowns() const { return ne_ + n_; }
    int ne() const { return ne_; }
    int slot(int cell) const { return solid_slot_[static_cast<std::size_t>(cell)]; }
    double w(int cell) const { return w_[static_cast<std::size_t>(cell)]; }

    double measure_of(int unknown) const
    {
        if (unknown >= ne_)
            return mesh_.cell(unknown - ne_).measure;
        for (int c = 0; c < n_; ++c)
            if (solid_slot_[static_cast<std::size_t>(c)] == unknown)
                return mesh_.cell(c).measure;
        return 0.0;
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(unknowns());
        for (int c = 0; c < n_; ++c) {
            const Cell& cell = mesh_.cell(c);
            const int s = slot(c);
            const double phie_c = x[ne_ + c];
            double re = tau_ * phie_c * cell.measure;
            double rs = 0.0;
            if (s >= 0)
                rs = tau_ * x[s] * cell.measure;
            for (const Neighbor& nb : neighbors_of(mesh_, c)) {
                const Face& f = mesh_.face(nb.face);
                const double dc = mesh_.normal_distance(c, nb.face);
                if (nb.other < 0) {
                    if (s >= 0)
                        rs -= delta_ * p_.boundary_current(mesh_, nb.face) * f.measure;
                    continue;
                }
                const double dn = mesh_.normal_distance(nb.other, nb.face);
                const double se_c = p_.sigma_e[static_cast<std::size_t>(c)];
                const double se_n = p_.sigma_e[static_cast<std::size_t>(nb.other)];
                const double te = f.measure / (dc / se_c + dn / se_n);
                const double drift = 0.5 * p_.d1 * (se_c * w(c) + se_n * w(nb.other));
                re += te * (phie_c - x[ne_ + nb.other]) +
                      delta_ * drift * nb.sign * p_.f_normal[static_cast<std::size_t>(nb.face)] * f.measure;
                const int sn = slot(nb.other);
                if (s >= 0 && sn >= 0) {
                    const double ss_c = p_.sigma_s[static_cast<std::size_t>(s)];
                    const double ss_n = p_.sigma_s[static_cast<std::size_t>(sn)];
                    const double ts = f.measure / (dc / ss_c + dn / ss_n);
                    rs += ts * (x[s] - x[sn]);
                }
            }
            if (s >= 0) {
                const auto si = static_cast<std::size_t>(s);
                const double y2 = x[s] - phie_c;
                const double i = sinh_kernel(p_.g1[si], p_.alpha, y2, ctx_.U()[si], w(c));
                const double transfer = delta_ * p_.A_s * i * cell.measure;
                rs += transfer;
                re -= transfer;
                r[s] = rs;
            }
            r[ne_ + c] = re;
        }
        return r;
    }

private:
    const Mesh& mesh_;
    std::span<const double> u_;
    double tau_;
    double delta_;
    const ButlerVolmerContext& ctx_;
    const PhysicalParams& p_;
    int ne_ = 0;
    int n_ = 0;
    std::vector<int> solid_slot_;
    std::vector<double> w_;
};

}  // namespace

std::vector<double> stacked(const PotentialPair& pot)
{
    std::vector<double> v = pot.phis;
    v.insert(v.end(), pot.phie.begin(), pot.phie.end());
    return v;
}

PotentialPair brute_force_solve(const Mesh& mesh, std::span<const double> u, double tau, double delta,
                                const ButlerVolmerContext& ctx, const PhysicalParams& params,
                                const OracleSettings& settings)
{
    DenseProblem problem(mesh, u, tau, delta, ctx, params);
    const int N = problem.unknowns();
    if (static_cast<std::size_t>(N) > kOracleMaxUnknowns)
        throw SolverError(SolverStage::Oracle, "oracle refuses systems above " +
                                                   std::to_string(kOracleMaxUnknowns) + " unknowns");

    std::vector<std::size_t> perm = settings.permutation;
    if (perm.empty()) {
        perm.resize(static_cast<std::size_t>(N));
        std::iota(perm.begin(), perm.end(), std::size_t{0});
    }
    if (perm.size() != static_cast<std::size_t>(N))
        throw StructuralError("oracle permutation has the wrong length");

    // z holds the unknowns in permuted order; the tau = 0 case drops the last
    // slot of z and recovers it from the constraint.
    const bool constrained = tau == 0.0;
    const int M = constrained ? N - 1 : N;
    std::vector<int> at_slot(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        at_slot[perm[static_cast<std::size_t>(i)]] = i;
    const int eliminated = at_slot[static_cast<std::size_t>(N - 1)];

    auto expand = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd x(N);
        for (int i = 0; i < N; ++i) {
            const int k = static_cast<int>(perm[static_cast<std::size_t>(i)]);
            if (k < M)
                x[i] = z[k];
        }
        if (constrained) {
            double s = 0.0;
            for (int i = 0; i < N; ++i)
                if (i != eliminated)
                    s += problem.measure_of(i) * x[i];
            x[eliminated] = -s / problem.measure_of(eliminated);
        }
        return x;
    };
    auto reduced_residual = [&](const Eigen::VectorXd& z) {
        const Eigen::VectorXd r = problem.residual(expand(z));
        Eigen::VectorXd out(M);
        for (int i = 0; i < N; ++i) {
            const int k = static_cast<int>(perm[static_cast<std::size_t>(i)]);
            if (k < M)
                out[k] = r[i];
        }
        return out;
    };

    Eigen::VectorXd z = Eigen::VectorXd::Zero(M);
    Eigen::VectorXd r = reduced_residual(z);
    std::vector<double> trace{r.cwiseAbs().maxCoeff()};
    int iters = 0;
    while (trace.back() > settings.tol) {
        if (iters >= settings.max_iters || !std::isfinite(trace.back()))
            throw SolverError(SolverStage::Oracle, "oracle Newton did not converge", trace);
        Eigen::MatrixXd J(M, M);
        for (int j = 0; j < M; ++j) {
            Eigen::VectorXd zp = z;
            Eigen::VectorXd zm = z;
            zp[j] += settings.fd_step;
            zm[j] -= settings.fd_step;
            J.col(j) = (reduced_residual(zp) - reduced_residual(zm)) / (2.0 * settings.fd_step);
        }
        z -= J.fullPivLu().solve(r);
        r = reduced_residual(z);
        trace.push_back(r.cwiseAbs().maxCoeff());
        ++iters;
    }

    const Eigen::VectorXd x = expand(z);
    PotentialPair pot;
    pot.phis.assign(x.data(), x.data() + problem.ne());
    pot.phie.assign(x.data() + problem.ne(), x.data() + N);
    pot.tau = tau;
    pot.delta = delta;
    pot.newton_iters = iters;
    pot.residual_norm = problem.residual(x).cwiseAbs().maxCoeff();
    pot.residual_trace = trace;
    refresh_norms(pot, mesh);
    return pot;
}

OracleStep oracle_step(const Mesh& mesh, std::span<const double> v, std::span<const double> u_prev, double t_prev,
                       double dt, double tau, double delta, const ButlerVolmerContext& ctx,
                       const PhysicalParams& p, const OracleSettings& settings)
{
    const ButlerVolmerContext at = ctx.at_time(t_prev + dt);
    OracleStep out;
    out.potentials = brute_force_solve(mesh, v, tau, delta, at, p, settings);
    const auto& phis = out.potentials.phis;
    const auto& phie = out.potentials.phie;
    const int n = static_cast<int>(mesh.num_cells());

    out.source.assign(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c) {
        const Cell& cell = mesh.cell(c);
        const int s = mesh.electrode_index(c);
        double ge[2] = {0.0, 0.0};
        double gs[2] = {0.0, 0.0};
        for (const Neighbor& nb : neighbors_of(mesh, c)) {
            const Face& f = mesh.face(nb.face);
            const double dc = mesh.normal_distance(c, nb.face);
            double fe = phie[static_cast<std::size_t>(c)];
            double fs = s >= 0 ? phis[static_cast<std::size_t>(s)] : 0.0;
            if (nb.other >= 0) {
                const double dn = mesh.normal_distance(nb.other, nb.face);
                fe = (dn * phie[static_cast<std::size_t>(c)] + dc * phie[static_cast<std::size_t>(nb.other)]) /
                     (dc + dn);
                const int sn = mesh.electrode_index(nb.other);
                if (s >= 0 && sn >= 0)
                    fs = (dn * phis[static_cast<std::size_t>(s)] + dc * phis[static_cast<std::size_t>(sn)]) /
                         (dc + dn);
            } else if (s >= 0) {
                fs += delta * p.boundary_current(mesh, nb.face) / p.sigma_s[static_cast<std::size_t>(s)] * dc;
            }
            for (int d = 0; d < 2; ++d) {
                ge[d] += fe * nb.sign * f.normal[static_cast<std::size_t>(d)] * f.measure / cell.measure;
                gs[d] += fs * nb.sign * f.normal[static_cast<std::size_t>(d)] * f.measure / cell.measure;
            }
        }
        const auto ci = static_cast<std::size_t>(c);
        const double w = clamp_band(v[ci], p.u0[ci], ctx.eps(), ctx.truncation());
        double q = p.sigma_e[ci] * (ge[0] * ge[0] + ge[1] * ge[1]) +
                   p.d1 * p.sigma_e[ci] * w * (p.f_cell[ci][0] * ge[0] + p.f_cell[ci][1] * ge[1]);
        if (s >= 0) {
            const auto si = static_cast<std::size_t>(s);
            const double y2 = phis[si] - phie[ci];
            const double U = at.U()[si];
            const double factor = p.heat_source_form == HeatSourceForm::Reduced ? y2 : y2 - U;
            q += p.A_s * sinh_kernel(p.g1[si], p.alpha, y2, U, w) * factor +
                 p.sigma_s[si] * (gs[0] * gs[0] + gs[1] * gs[1]);
        }
        out.source[ci] = q;
    }

    const double robin = p.robin_sign == RobinSign::Dissipative ? 1.0 : -1.0;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (int c = 0; c < n; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        const double m = mesh.cell(c).measure;
        A(c, c) += p.rho_cp * m / dt;
        b[c] = p.rho_cp * m / dt * u_prev[ci] + out.source[ci] * m;
        for (const Neighbor& nb : neighbors_of(mesh, c)) {
            const Face& f = mesh.face(nb.face);
            if (nb.other < 0) {
                const double wb = clamp_band(v[ci], p.u0[ci], ctx.eps(), ctx.truncation());
                b[c] -= robin * p.k1 * (wb - p.T_a) * f.measure;
                continue;
            }
            const double t = f.measure / (mesh.normal_distance(c, nb.face) / p.k[ci] +
                                          mesh.normal_distance(nb.other, nb.face) /
                                              p.k[static_cast<std::size_t>(nb.other)]);
            A(c, c) += t;
            A(c, nb.other) -= t;
        }
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(b);
    out.u.assign(x.data(), x.data() + n);
    return out;
}

FdReport fd_check(DerivativeId id, std::span<const FdPoint> points, double step, const ButlerVolmerContext& ctx)
{
    const Mesh& mesh = ctx.mesh();
    const PhysicalParams& p = ctx.params();
    FdReport report;

    // Source evaluated at one cell with all other cells at rest.
    auto source_at = [&](const FdPoint& pt, double u, double phis, double phie) {
        std::vector<double> uu(p.u0);
        std::vector<double> ps(mesh.num_electrode_cells(), 0.0);
        std::vector<double> pe(mesh.num_cells(), 0.0);
        std::vector<Vec2> gs(mesh.num_electrode_cells(), Vec2{0.0, 0.0});
        std::vector<Vec2> ge(mesh.num_cells(), Vec2{0.0, 0.0});
        const auto c = static_cast<std::size_t>(pt.cell);
        uu[c] = u;
        pe[c] = phie;
        ge[c] = pt.grad_phie;
        const int e = mesh.electrode_index(pt.cell);
        if (e >= 0) {
            ps[static_cast<std::size_t>(e)] = phis;
            gs[static_cast<std::size_t>(e)] = pt.grad_phis;
        }
        return source_Q_eps(uu, ps, pe, gs, ge, ctx)[c];
    };

    for (std::size_t k = 0; k < points.size(); ++k) {
        const FdPoint& pt = points[k];
        const auto c = static_cast<std::size_t>(pt.cell);
        const double gap = std::abs(p.u0[c] - pt.u);
        const bool touches_kink = std::abs(gap - ctx.eps()) <= step;
        const bool in_u = id == DerivativeId::IfaraU || id == DerivativeId::SourceU;
        if (in_u && touches_kink && ctx.truncation() == Truncation::On) {
            ++report.excluded;
            report.excluded_indices.push_back(k);
            continue;
        }
        const int e = mesh.electrode_index(pt.cell);
        double analytic = 0.0;
        double numeric = 0.0;
        switch (id) {
        case DerivativeId::IfaraY2:
            analytic = d_ifara_dy2(pt.u, pt.y2, pt.cell, ctx);
            numeric = (i_fara_eps(pt.u, pt.y2 + step, pt.cell, ctx) - i_fara_eps(pt.u, pt.y2 - step, pt.cell, ctx)) /
                      (2.0 * step);
            break;
        case DerivativeId::IfaraU:
            analytic = d_ifara_du(pt.u, pt.y2, pt.cell, ctx);
            numeric = (i_fara_eps(pt.u + step, pt.y2, pt.cell, ctx) - i_fara_eps(pt.u - step, pt.y2, pt.cell, ctx)) /
                      (2.0 * step);
            break;
        case DerivativeId::SourceU: {
            const double dw = ctx.clamped(pt.cell, pt.u) ? 0.0 : 1.0;
            analytic = p.d1 * p.sigma_e[c] * dw * dot(p.f_cell[c], pt.grad_phie);
            if (e >= 0) {
                const double factor =
                    p.heat_source_form == HeatSourceForm::Reduced ? pt.y2
                                                                  : pt.y2 - ctx.U()[static_cast<std::size_t>(e)];
                analytic += p.A_s * d_ifara_du(pt.u, pt.y2, pt.cell, ctx) * factor;
            }
            numeric = (source_at(pt, pt.u + step, pt.y2, 0.0) - source_at(pt, pt.u - step, pt.y2, 0.0)) / (2.0 * step);
            break;
        }
        case DerivativeId::SourcePhis:
        case DerivativeId::SourcePhie: {
            if (e < 0)
                throw StructuralError("fd_check: kernel derivative requested on a separator cell");
            const double factor =
                p.heat_source_form == HeatSourceForm::Reduced ? pt.y2 : pt.y2 - ctx.U()[static_cast<std::size_t>(e)];
            const double dq = p.A_s * (d_ifara_dy2(pt.u, pt.y2, pt.cell, ctx) * factor +
                                       i_fara_eps(pt.u, pt.y2, pt.cell, ctx));
            if (id == DerivativeId::SourcePhis) {
                analytic = dq;
                numeric = (source_at(pt, pt.u, pt.y2 + step, 0.0) - source_at(pt, pt.u, pt.y2 - step, 0.0)) /
                          (2.0 * step);
            } else {
                analytic = -dq;
                numeric = (source_at(pt, pt.u, pt.y2, step) - source_at(pt, pt.u, pt.y2, -step)) / (2.0 * step);
            }
            break;
        }
        }
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-300});
        const double rel = analytic == numeric ? 0.0 : std::abs(analytic - numeric) / denom;
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.evaluated;
    }
    return report;
}

double convergence_rate(std::span<const double> errors, std::span<const double> hs)
{
    if (errors.size() != hs.size() || hs.size() < 3)
        throw std::invalid_argument("convergence_rate needs at least three (h, error) pairs");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (!(hs[i] > 0.0) || !(errors[i] > 0.0))
            throw std::invalid_argument("convergence_rate needs positive h and error values");
        if (i > 0 && !(hs[i] < hs[i - 1]))
            throw std::invalid_argument("convergence_rate needs strictly decreasing h");
    }
    const double n = static_cast<double>(hs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OracleReport compare(std::string case_id, std::string quantity, std::vector<double> main_values,
                     std::vector<double> oracle_values, double tolerance)
{
    if (main_values.size() != oracle_values.size())
        throw StructuralError("compare: value lists differ in length");
    OracleReport r;
    r.case_id = std::move(case_id);
    r.quantity = std::move(quantity);
    for (std::size_t i = 0; i < main_values.size(); ++i) {
        const double d = std::abs(main_values[i] - oracle_values[i]);
        r.max_abs = std::max(r.max_abs, d);
        const double scale = std::max(std::abs(main_values[i]), std::abs(oracle_values[i]));
        if (scale > 0.0)
            r.max_rel = std::max(r.max_rel, d / scale);
    }
    r.main_values = std::move(main_values);
    r.oracle_values = std::move(oracle_values);
    r.tolerance = tolerance;
    r.pass = r.max_abs <= tolerance;
    return r;
}

std::string render_reports(std::span<const OracleReport> reports)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %-14s %12s %12s %10s %s\n", "case", "quantity", "max_abs", "max_rel",
                  "tol", "result");
    out << line;
    for (const OracleReport& r : reports) {
        std::snprintf(line, sizeof line, "%-28s %-14s %12.4e %12.4e %10.1e %s\n", r.case_id.c_str(),
                      r.quantity.c_str(), r.max_abs, r.max_rel, r.tolerance, r.pass ? "pass" : "FAIL");
        out << line;
    }
    return out.str();
}

}  // namespace tecell
