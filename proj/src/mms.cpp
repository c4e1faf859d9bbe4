#include "tecell/mms.hpp"

#include "tecell/heat.hpp"
#include "tecell/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tecell {

namespace {

constexpr double kPi = std::numbers::pi;

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

template <typename Fn>
double integrate(double a, double b, Fn&& fn)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i)
        sum += kGaussWeights[i] * fn(mid + half * kGaussNodes[i]);
    return sum * half;
}

// Shape constants of the potential case.
constexpr double kPhieAmp = 0.3;
constexpr double kPhisAmp = 0.2;
constexpr double kAnodeOffset = 0.5;
constexpr double kCathodeOffset = -0.4;

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double HeatMms::exact(double x, double t) const { return T_a + amplitude(t) * std::cos(kPi * x / length()); }

double HeatMms::forcing(double x, double t) const
{
    const double c = std::cos(kPi * x / length());
    const double kappa = kPi / length();
    return rho_cp * amplitude_rate(t) * c + k * kappa * kappa * amplitude(t) * c;
}

UniformData HeatMms::data() const
{
    UniformData d;
    d.rho_cp = rho_cp;
    d.k = {k, k, k};
    d.T_a = T_a;
    d.u0 = T_a;
    return d;
}

double PotentialMms::exact_phie(double x) const
{
    const double L = lengths.anode + lengths.separator + lengths.cathode;
    return kPhieAmp * std::cos(kPi * x / L);
}

double PotentialMms::exact_phis(double x) const
{
    const double sigma_a = data.sigma_s.anode;
    const double sigma_c = data.sigma_s.cathode;
    const double La = lengths.anode;
    const double Lc = lengths.cathode;
    const double x1 = lengths.anode + lengths.separator;
    if (x <= La) {
        const double b = delta * data.I_a / (2.0 * sigma_a * La);
        return kAnodeOffset + kPhisAmp * std::cos(kPi * x / La) + b * (x - La) * (x - La);
    }
    const double b = delta * data.I_c / (2.0 * sigma_c * Lc);
    return kCathodeOffset + kPhisAmp * std::cos(kPi * (x - x1) / Lc) + b * (x - x1) * (x - x1);
}

PotentialForcing PotentialMms::forcing(const Mesh& mesh) const
{
    const double L = mesh.total_length();
    const double La = lengths.anode;
    const double Lc = lengths.cathode;
    const double x1 = lengths.anode + lengths.separator;
    const double w = data.u0;  // u = u0, so the effective temperature is u0

    auto phis_second = [&](double x) {
        if (x <= La) {
            const double b = delta * data.I_a / (2.0 * data.sigma_s.anode * La);
            return -kPhisAmp * (kPi / La) * (kPi / La) * std::cos(kPi * x / La) + 2.0 * b;
        }
        const double b = delta * data.I_c / (2.0 * data.sigma_s.cathode * Lc);
        return -kPhisAmp * (kPi / Lc) * (kPi / Lc) * std::cos(kPi * (x - x1) / Lc) + 2.0 * b;
    };
    auto phie_second = [&](double x) { return -kPhieAmp * (kPi / L) * (kPi / L) * std::cos(kPi * x / L); };
    auto f_slope = [&](double x) { return data.f_amplitude * (kPi / L) * std::cos(kPi * x / L); };
    auto kernel = [&](double x, Region r) {
        const bool anode = r == Region::Anode;
        const double g1 = anode ? data.g1.anode : data.g1.cathode;
        const double U = anode ? data.U.anode : data.U.cathode;
        return 2.0 * g1 * std::sinh(data.alpha * (exact_phis(x) - exact_phie(x) - U) / w);
    };
    auto sigma_e_of = [&](Region r) {
        switch (r) {
        case Region::Anode: return data.sigma_e.anode;
        case Region::Separator: return data.sigma_e.separator;
        case Region::Cathode: return data.sigma_e.cathode;
        }
        return data.sigma_e.anode;
    };

    PotentialForcing out;
    out.electrolyte.assign(mesh.num_cells(), 0.0);
    out.solid.assign(mesh.num_electrode_cells(), 0.0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cell(static_cast<int>(c));
        const double a = cell.centroid[0] - 0.5 * cell.measure;
        const double b = cell.centroid[0] + 0.5 * cell.measure;
        const double se = sigma_e_of(cell.region);
        const bool electrode = is_electrode(cell.region);
        out.electrolyte[c] = integrate(a, b, [&](double x) {
            double v = -se * phie_second(x) + delta * se * data.d1 * w * f_slope(x) + tau * exact_phie(x);
            if (electrode)
                v -= delta * data.A_s * kernel(x, cell.region);
            return v;
        });
        const int e = mesh.electrode_index(static_cast<int>(c));
        if (e < 0)
            continue;
        const double ss = cell.region == Region::Anode ? data.sigma_s.anode : data.sigma_s.cathode;
        out.solid[static_cast<std::size_t>(e)] = integrate(a, b, [&](double x) {
            return -ss * phis_second(x) + tau * exact_phis(x) + delta * data.A_s * kernel(x, cell.region);
        });
    }
    return out;
}

PotentialPair PotentialMms::sampled(const Mesh& mesh) const
{
    PotentialPair p = PotentialPair::zeros(mesh);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        p.phie[c] = exact_phie(mesh.cell(static_cast<int>(c)).centroid[0]);
    for (std::size_t e = 0; e < mesh.num_electrode_cells(); ++e)
        p.phis[e] = exact_phis(mesh.cell(mesh.electrode_cells()[e]).centroid[0]);
    p.tau = tau;
    p.delta = delta;
    refresh_norms(p, mesh);
    return p;
}

double PotentialMms::compatibility_residual(const Mesh& mesh) const
{
    const PotentialForcing f = forcing(mesh);
    double total = 0.0;
    for (double v : f.solid)
        total += v;
    for (double v : f.electrolyte)
        total += v;

    // Closed-form integrals of the exact fields.
    const double La = lengths.anode;
    const double Lc = lengths.cathode;
    const double ba = delta * data.I_a / (2.0 * data.sigma_s.anode * La);
    const double bc = delta * data.I_c / (2.0 * data.sigma_s.cathode * Lc);
    const double int_phis = kAnodeOffset * La + ba * La * La * La / 3.0 + kCathodeOffset * Lc + bc * Lc * Lc * Lc / 3.0;
    const double int_phie = 0.0;

    const PhysicalParams p = make_params(mesh, data);
    double current = 0.0;
    for (std::size_t fi = 0; fi < mesh.num_faces(); ++fi) {
        const Face& face = mesh.face(static_cast<int>(fi));
        if (face.on_boundary() && mesh.electrode_index(face.left) >= 0)
            current += p.boundary_current(mesh, static_cast<int>(fi)) * face.measure;
    }
    return std::abs(total - (tau * (int_phis + int_phie) - delta * current));
}

MmsCase mms_case(const std::string& id)
{
    if (id == "heat" || id == "heat-time") {
        HeatMms h;
        h.lengths = {1.0, 0.5, 1.0};
        h.rho_cp = 1.5;
        h.k = 0.7;
        h.T_a = 2.0;
        MmsCase c;
        c.id = id;
        if (id == "heat") {
            h.amplitude = [](double t) { return t; };
            h.amplitude_rate = [](double) { return 1.0; };
            c.description = "u = T_a + t cos(pi x / L)";
        } else {
            h.amplitude = [](double t) { return std::sin(t); };
            h.amplitude_rate = [](double t) { return std::cos(t); };
            c.description = "u = T_a + sin(t) cos(pi x / L)";
        }
        c.heat = h;
        return c;
    }
    if (id == "potential") {
        PotentialMms m;
        m.lengths = {1.0, 0.4, 1.0};
        UniformData& d = m.data;
        d.sigma_s = {1.5, 1.5};
        d.sigma_e = {0.8, 0.8, 0.8};
        d.A_s = 1.0;
        d.alpha = 0.5;
        d.g1 = {1.0, 1.0};
        d.U = {0.1, 0.1};
        d.d1 = 0.3;
        d.f_amplitude = 1.0;
        d.f_profile = FieldProfile::Sine;
        d.u0 = 1.0;
        d.T_a = 1.0;
        d.I_a = 0.2;
        d.I_c = -0.2;
        m.tau = 1e-2;
        m.delta = 1.0;
        m.eps = 0.5;
        return {"potential", "trigonometric potentials with quadratic current-carrying part", std::nullopt, m};
    }
    throw std::invalid_argument("unknown manufactured-solution case '" + id + "'");
}

std::vector<std::string> mms_catalog() { return {"heat", "heat-time", "potential"}; }

SandwichCells proportional_cells(const SandwichLengths& lengths, int multiplier)
{
    for (int k = 1; k <= 1000; ++k) {
        const double h = lengths.separator / k;
        const double na = lengths.anode / h;
        const double nc = lengths.cathode / h;
        if (std::abs(na - std::round(na)) < 1e-9 && std::abs(nc - std::round(nc)) < 1e-9)
            return {static_cast<int>(std::round(na)) * multiplier, k * multiplier,
                    static_cast<int>(std::round(nc)) * multiplier};
    }
    throw std::invalid_argument("region lengths are not commensurate");
}

namespace {

double heat_error(const HeatMms& mms, const Mesh& mesh, double dt, double horizon)
{
    const PhysicalParams params = make_params(mesh, mms.data());
    TemperatureField u;
    for (const Cell& c : mesh.cells())
        u.values.push_back(mms.exact(c.centroid[0], 0.0));
    const std::vector<double> w_boundary(mesh.num_faces(), mms.T_a);
    const long steps = std::lround(horizon / dt);
    std::vector<double> q(mesh.num_cells());
    for (long n = 1; n <= steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
            q[c] = mms.forcing(mesh.cell(static_cast<int>(c)).centroid[0], t);
        u = step_temperature(u, q, w_boundary, dt, mesh, params);
    }
    const double t_end = static_cast<double>(steps) * dt;
    double err = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        err = std::max(err, std::abs(u.values[c] - mms.exact(mesh.cell(static_cast<int>(c)).centroid[0], t_end)));
    return err;
}

void fit(RefinementStudy& s, bool by_time)
{
    std::vector<double> errors;
    std::vector<double> hs;
    for (const RefinementRow& r : s.rows) {
        errors.push_back(r.error);
        hs.push_back(by_time ? r.dt : r.h);
    }
    s.rate = convergence_rate(errors, hs);
}

}  // namespace

RefinementStudy heat_space_study(const HeatMms& mms, const std::string& id, std::vector<int> multipliers, double dt,
                                 double horizon)
{
    RefinementStudy s{id, "space", {}, 0.0};
    for (int m : multipliers) {
        const Mesh mesh = build_sandwich_mesh(mms.lengths, proportional_cells(mms.lengths, m));
        s.rows.push_back({mesh.cell(0).measure, dt, heat_error(mms, mesh, dt, horizon)});
    }
    fit(s, false);
    return s;
}

RefinementStudy heat_time_study(const HeatMms& mms, const std::string& id, int multiplier, std::vector<double> steps,
                                double horizon)
{
    RefinementStudy s{id, "time", {}, 0.0};
    const Mesh mesh = build_sandwich_mesh(mms.lengths, proportional_cells(mms.lengths, multiplier));
    for (double dt : steps)
        s.rows.push_back({mesh.cell(0).measure, dt, heat_error(mms, mesh, dt, horizon)});
    fit(s, true);
    return s;
}

RefinementStudy potential_space_study(const PotentialMms& mms, const std::string& id, std::vector<int> multipliers)
{
    RefinementStudy s{id, "space", {}, 0.0};
    for (int m : multipliers) {
        const Mesh mesh = build_sandwich_mesh(mms.lengths, proportional_cells(mms.lengths, m));
        const PhysicalParams params = make_params(mesh, mms.data);
        const ButlerVolmerContext ctx(mesh, params, mms.eps);
        const PotentialForcing forcing = mms.forcing(mesh);
        const PotentialPair exact = mms.sampled(mesh);
        std::vector<double> r = assemble_residual(exact, params.u0, ctx, mms.tau, mms.delta, &forcing);
        for (std::size_t e = 0; e < mesh.num_electrode_cells(); ++e)
            r[e] /= mesh.cell(mesh.electrode_cells()[e]).measure;
        for (std::size_t c = 0; c < mesh.num_cells(); ++c)
            r[mesh.num_electrode_cells() + c] /= mesh.cell(static_cast<int>(c)).measure;
        s.rows.push_back({mesh.cell(0).measure, 0.0, max_abs(r)});
    }
    fit(s, false);
    return s;
}

std::vector<RefinementStudy> default_studies(const MmsCase& c)
{
    if (c.heat && c.id == "heat")
        return {heat_space_study(*c.heat, c.id, {1, 2, 4, 8}, 0.1, 1.0)};
    if (c.heat)
        return {heat_time_study(*c.heat, c.id, 80, {0.2, 0.1, 0.05, 0.025}, 1.0)};
    return {potential_space_study(*c.potential, c.id, {1, 2, 4, 8})};
}

std::string render_study(const RefinementStudy& study)
{
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "case %s, %s refinement\n", study.case_id.c_str(), study.axis.c_str());
    out << line;
    std::snprintf(line, sizeof line, "%14s %14s %14s\n", "h", "dt", "error");
    out << line;
    for (const RefinementRow& r : study.rows) {
        std::snprintf(line, sizeof line, "%14.6e %14.6e %14.6e\n", r.h, r.dt, r.error);
        out << line;
    }
    std::snprintf(line, sizeof line, "fitted rate %.4f\n", study.rate);
    out << line;
    return out.str();
}

}  // namespace tecell
