#include "tecell/heat.hpp"

#include "tecell/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tecell {

TemperatureField step_temperature(const TemperatureField& u_prev, std::span<const double> q,
                                  std::span<const double> w_boundary, double dt, const Mesh& mesh,
                                  const PhysicalParams& params)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("dt must be positive");
    const std::size_t n = mesh.num_cells();
    if (u_prev.values.size() != n || q.size() != n || w_boundary.size() != mesh.num_faces() ||
        params.k.size() != n)
        throw StructuralError("step_temperature: field sizes do not match the mesh");

    const double robin = params.robin_sign == RobinSign::Dissipative ? 1.0 : -1.0;
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t c = 0; c < n; ++c) {
        const double m = mesh.cell(static_cast<int>(c)).measure;
        const double mass = params.rho_cp * m / dt;
        triplets.emplace_back(static_cast<int>(c), static_cast<int>(c), mass);
        rhs[static_cast<Eigen::Index>(c)] = mass * u_prev.values[c] + q[c] * m;
    }
    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const Face& f = mesh.face(static_cast<int>(fi));
        const int l = f.left;
        if (f.on_boundary()) {
            rhs[l] -= robin * params.k1 * (w_boundary[fi] - params.T_a) * f.measure;
            continue;
        }
        const int r = f.right;
        const double dl = mesh.normal_distance(l, static_cast<int>(fi));
        const double dr = mesh.normal_distance(r, static_cast<int>(fi));
        const double t = f.measure / (dl / params.k[static_cast<std::size_t>(l)] + dr / params.k[static_cast<std::size_t>(r)]);
        triplets.emplace_back(l, l, t);
        triplets.emplace_back(l, r, -t);
        triplets.emplace_back(r, l, -t);
        triplets.emplace_back(r, r, t);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw SolverError(SolverStage::Heat, "singular heat system");
    const Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite())
        throw SolverError(SolverStage::Heat, "non-finite temperature");

    TemperatureField next;
    next.values.assign(x.data(), x.data() + x.size());
    next.time = u_prev.time + dt;
    return next;
}

std::vector<double> boundary_effective_temperature(std::span<const double> u, const ButlerVolmerContext& ctx)
{
    const Mesh& mesh = ctx.mesh();
    std::vector<double> w(mesh.num_faces(), 0.0);
    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const Face& f = mesh.face(static_cast<int>(fi));
        if (f.on_boundary())
            w[fi] = ctx.effective_temperature(f.left, u[static_cast<std::size_t>(f.left)]);
    }
    return w;
}

SourceNormAccumulator::SourceNormAccumulator(int dimension)
    // exponent p/2 just above N/2 + 1
    : exponent_(0.5 * dimension + 1.5)
{
}

void SourceNormAccumulator::add(std::span<const double> q, const Mesh& mesh, double dt)
{
    for (std::size_t c = 0; c < q.size(); ++c)
        sum_ += std::pow(std::abs(q[c]), exponent_) * mesh.cell(static_cast<int>(c)).measure * dt;
}

double SourceNormAccumulator::norm() const { return std::pow(sum_, 1.0 / exponent_); }

LinfRecord linf_monitor(std::span<const double> u, double q_norm, const PhysicalParams& params, double ceiling)
{
    LinfRecord r;
    for (double v : u)
        r.sup_u = std::max(r.sup_u, std::abs(v));
    double u0_sup = 0.0;
    for (double v : params.u0)
        u0_sup = std::max(u0_sup, std::abs(v));
    r.bound_estimate = q_norm + 2.0 * u0_sup + 1.0;
    r.ratio = r.sup_u / r.bound_estimate;
    r.tripped = !(r.sup_u <= ceiling);
    return r;
}

}  // namespace tecell
