#include "tecell/params.hpp"

#include "tecell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tecell {

double PhysicalParams::boundary_current(const Mesh& mesh, int face) const
{
    const Face& f = mesh.face(face);
    if (!current_face.empty())
        return current_face[static_cast<std::size_t>(face)];
    switch (f.tag) {
    case BoundaryTag::GammaA: return current_a;
    case BoundaryTag::GammaC: return current_c;
    default: return 0.0;
    }
}

std::span<const double> PhysicalParams::U_at(double t) const
{
    const std::vector<double>* active = &U;
    for (const OcpScheduleEntry& e : U_schedule) {
        if (e.start_time <= t)
            active = &e.values;
    }
    return *active;
}

PhysicalParams make_params(const Mesh& mesh, const UniformData& data)
{
    PhysicalParams p;
    p.rho_cp = data.rho_cp;
    p.alpha = data.alpha;
    p.A_s = data.A_s;
    p.k1 = data.k1;
    p.T_a = data.T_a;
    p.d1 = data.d1;
    p.g0 = data.g0.value_or(std::min(data.g1.anode, data.g1.cathode));
    p.current_a = data.I_a;
    p.current_c = data.I_c;
    p.heat_source_form = data.heat_source_form;
    p.robin_sign = data.robin_sign;

    auto pick = [](const RegionValues& v, Region r) {
        switch (r) {
        case Region::Anode: return v.anode;
        case Region::Separator: return v.separator;
        case Region::Cathode: return v.cathode;
        }
        return v.anode;
    };
    auto pick_electrode = [](const ElectrodeValues& v, Region r) {
        return r == Region::Anode ? v.anode : v.cathode;
    };

    for (const Cell& c : mesh.cells()) {
        p.k.push_back(pick(data.k, c.region));
        p.sigma_e.push_back(pick(data.sigma_e, c.region));
        p.u0.push_back(data.u0 + data.u0_slope * c.centroid[0]);
    }
    for (int cell : mesh.electrode_cells()) {
        const Region r = mesh.cell(cell).region;
        p.sigma_s.push_back(pick_electrode(data.sigma_s, r));
        p.g1.push_back(pick_electrode(data.g1, r));
        p.U.push_back(pick_electrode(data.U, r));
    }

    const double length = mesh.total_length();
    const double amp = data.f_amplitude;
    if (data.f_profile == FieldProfile::Sine) {
        // sin(pi x / L) evaluated from the nearer end so both ends give exact zeros.
        sample_vector_field(mesh, p, [=](double x, double) {
            const double s = x <= 0.5 * length ? x : length - x;
            return Vec2{amp * std::sin(std::numbers::pi * s / length), 0.0};
        });
    } else {
        sample_vector_field(mesh, p, [=](double, double) { return Vec2{amp, 0.0}; });
    }
    return p;
}

namespace {

void check_size(std::size_t actual, std::size_t expected, const char* name, const char* where)
{
    if (actual != expected) {
        std::ostringstream msg;
        msg << name << " has " << actual << " values, expected " << expected << " (" << where << ")";
        throw StructuralError(msg.str());
    }
}

template <typename Range>
bool all_finite(const Range& r)
{
    return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
}

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(12);
    s << v;
    return s.str();
}

}  // namespace

void check_structure(const PhysicalParams& p, const Mesh& mesh)
{
    const std::size_t n = mesh.num_cells();
    const std::size_t ne = mesh.num_electrode_cells();
    check_size(p.k.size(), n, "k", "all cells");
    check_size(p.sigma_e.size(), n, "sigma_e", "all cells");
    check_size(p.u0.size(), n, "u0", "all cells");
    check_size(p.f_cell.size(), n, "f", "all cells");
    check_size(p.f_normal.size(), mesh.num_faces(), "f normal components", "all faces");
    check_size(p.sigma_s.size(), ne, "sigma_s", "electrode cells only");
    check_size(p.g1.size(), ne, "g1", "electrode cells only");
    check_size(p.U.size(), ne, "U", "electrode cells only");
    for (const OcpScheduleEntry& e : p.U_schedule)
        check_size(e.values.size(), ne, "U schedule entry", "electrode cells only");
    if (!p.current_face.empty()) {
        check_size(p.current_face.size(), mesh.num_faces(), "current table", "all faces");
        for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
            const BoundaryTag tag = mesh.face(static_cast<int>(i)).tag;
            if (tag != BoundaryTag::GammaA && tag != BoundaryTag::GammaC && p.current_face[i] != 0.0)
                throw StructuralError("current given on face " + std::to_string(i) + " which is not on Gamma_a or Gamma_c");
        }
    }
}

ValidationReport validate_hypotheses(const PhysicalParams& p, const Mesh& mesh)
{
    check_structure(p, mesh);
    ValidationReport report;

    {
        HypothesisCheck h{"H1", true, ""};
        const std::pair<const char*, double> constants[] = {{"rho_cp", p.rho_cp}, {"T_a", p.T_a},
                                                            {"alpha", p.alpha},   {"A_s", p.A_s},
                                                            {"k1", p.k1},         {"d1", p.d1}};
        for (const auto& [name, value] : constants) {
            if (!(value > 0.0) || !std::isfinite(value)) {
                h.pass = false;
                h.detail += std::string(h.detail.empty() ? "" : "; ") + name + " = " + fmt(value) + " is not a positive constant";
            }
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H2", true, ""};
        const std::pair<const char*, const std::vector<double>*> fields[] = {
            {"k", &p.k}, {"sigma_s", &p.sigma_s}, {"sigma_e", &p.sigma_e}};
        for (const auto& [name, field] : fields) {
            const double lo = field->empty() ? 0.0 : *std::min_element(field->begin(), field->end());
            if (!all_finite(*field) || !(lo > 0.0)) {
                h.pass = false;
                h.detail += std::string(h.detail.empty() ? "" : "; ") + name + " min = " + fmt(lo) + " is not bounded away from zero";
            }
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H3", true, ""};
        bool ok = all_finite(p.U);
        for (const OcpScheduleEntry& e : p.U_schedule)
            ok = ok && all_finite(e.values) && std::isfinite(e.start_time);
        if (!ok) {
            h.pass = false;
            h.detail = "U is not bounded (non-finite values)";
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H4", true, ""};
        const double lo = p.g1.empty() ? 0.0 : *std::min_element(p.g1.begin(), p.g1.end());
        if (!(p.g0 > 0.0)) {
            h.pass = false;
            h.detail = "g0 = " + fmt(p.g0) + " must be positive";
        } else if (!all_finite(p.g1) || lo < p.g0) {
            h.pass = false;
            h.detail = "min g1 = " + fmt(lo) + " is below g0 = " + fmt(p.g0);
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H5", true, ""};
        double worst = 0.0;
        bool finite = true;
        for (const Vec2& v : p.f_cell)
            finite = finite && std::isfinite(v[0]) && std::isfinite(v[1]);
        for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
            if (mesh.face(static_cast<int>(i)).on_boundary())
                worst = std::max(worst, std::abs(p.f_normal[i]));
        }
        if (!finite || !all_finite(p.f_normal)) {
            h.pass = false;
            h.detail = "f is not bounded";
        } else if (worst != 0.0) {
            h.pass = false;
            h.detail = "f.n = " + fmt(worst) + " on the outer boundary (must be exactly zero)";
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H6", true, ""};
        double sum = 0.0;
        double magnitude = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
            const double current = p.boundary_current(mesh, static_cast<int>(i));
            finite = finite && std::isfinite(current);
            const double flux = current * mesh.face(static_cast<int>(i)).measure;
            sum += flux;
            magnitude += std::abs(flux);
        }
        if (!finite) {
            h.pass = false;
            h.detail = "I is not bounded";
        } else if (std::abs(sum) > 1e-12 * std::max(1.0, magnitude)) {
            h.pass = false;
            h.detail = "boundary current does not integrate to zero: sum = " + fmt(sum);
        } else {
            h.detail = "sum = " + fmt(sum);
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"H7", true, ""};
        const double sep = region_measure(mesh, RegionSet::Separator);
        const double anode = region_measure(mesh, RegionSet::Anode);
        if (!(sep < 0.5 * anode)) {
            h.pass = false;
            h.detail = "separator measure " + fmt(sep) + " is not below half the anode measure " + fmt(anode);
        }
        report.checks.push_back(h);
    }
    {
        HypothesisCheck h{"U0", true, ""};
        const double lo = p.u0.empty() ? 0.0 : *std::min_element(p.u0.begin(), p.u0.end());
        if (!all_finite(p.u0) || !(lo > 0.0)) {
            h.pass = false;
            h.detail = "u0 must be positive (min = " + fmt(lo) + ")";
        } else {
            h.detail = "L0 = " + fmt(lo);
        }
        report.checks.push_back(h);
    }
    return report;
}

bool ValidationReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& h) { return h.pass; });
}

const HypothesisCheck* ValidationReport::find(const std::string& id) const
{
    for (const HypothesisCheck& h : checks) {
        if (h.id == id)
            return &h;
    }
    return nullptr;
}

std::string ValidationReport::to_text() const
{
    std::ostringstream out;
    for (const HypothesisCheck& h : checks) {
        out << h.id << " " << (h.pass ? "pass" : "FAIL");
        if (!h.detail.empty())
            out << ": " << h.detail;
        out << "\n";
    }
    out << (all_pass() ? "H1..H7 pass" : "hypothesis check failed") << "\n";
    return out.str();
}

std::string ValidationReport::to_machine() const
{
    std::ostringstream out;
    for (const HypothesisCheck& h : checks)
        out << "validation." << h.id << " = " << (h.pass ? "pass" : "fail") << "\n";
    out << "validation.overall = " << (all_pass() ? "pass" : "fail") << "\n";
    return out.str();
}

EpsilonBounds epsilon_bounds(std::span<const double> u0)
{
    if (u0.empty())
        throw std::invalid_argument("u0 is empty");
    const double lo = *std::min_element(u0.begin(), u0.end());
    if (!(lo > 0.0))
        throw std::invalid_argument("u0 must be positive");
    return {lo, 0.0, lo};
}

double exchange_current_prefactor(double faraday, double k0, double c_e, double c_s_max, double c_s_surf,
                                  double alpha)
{
    if (c_e < 0.0 || c_s_surf < 0.0 || c_s_surf > c_s_max)
        throw std::invalid_argument("concentrations out of range");
    return faraday * k0 * std::pow(c_e, alpha) * std::pow(c_s_max - c_s_surf, alpha) * std::pow(c_s_surf, alpha);
}

}  // namespace tecell
