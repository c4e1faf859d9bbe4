#pragma once

#include "tecell/mesh.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tecell {

/// Factor multiplying A_s * i_fara in the heat source: the reduced system uses
/// (phi_s - phi_e); the overpotential form uses (phi_s - phi_e - U).
enum class HeatSourceForm { Reduced, Overpotential };

/// Robin exchange convention. Dissipative: -k grad(u).n = k1 (w - T_a).
/// Literal: +k grad(u).n = k1 (w - T_a).
enum class RobinSign { Dissipative, Literal };

/// Piecewise-constant-in-time open-circuit potential, active from start_time on.
struct OcpScheduleEntry {
    double start_time = 0.0;
    std::vector<double> values;  ///< electrode ordering
};

/// Coefficient data of the reduced thermal-electrochemical system.
///
/// Fields on the whole domain are indexed by cell; fields on the electrodes
/// (sigma_s, g1, U) follow Mesh::electrode_cells(); f_normal is indexed by face.
struct PhysicalParams {
    double rho_cp = 1.0;
    double alpha = 1.0;
    double A_s = 1.0;
    double k1 = 1.0;
    double T_a = 1.0;
    double d1 = 1.0;
    double g0 = 1.0;

    std::vector<double> k;
    std::vector<double> sigma_e;
    std::vector<double> sigma_s;
    std::vector<double> g1;
    std::vector<double> U;
    std::vector<Vec2> f_cell;
    std::vector<double> f_normal;

    double current_a = 0.0;  ///< uniform current density on Gamma_a
    double current_c = 0.0;  ///< uniform current density on Gamma_c
    std::vector<double> current_face;  ///< optional per-face table; overrides the scalars when non-empty

    std::vector<double> u0;

    std::vector<OcpScheduleEntry> U_schedule;

    HeatSourceForm heat_source_form = HeatSourceForm::Reduced;
    RobinSign robin_sign = RobinSign::Dissipative;

    /// Applied current density on a face (zero off Gamma_a and Gamma_c).
    double boundary_current(const Mesh& mesh, int face) const;

    /// Open-circuit potential in effect at time t.
    std::span<const double> U_at(double t) const;
};

struct ElectrodeValues {
    double anode = 1.0;
    double cathode = 1.0;
};

struct RegionValues {
    double anode = 1.0;
    double separator = 1.0;
    double cathode = 1.0;
};

enum class FieldProfile { Sine, Constant };

/// Region-wise constant description of the coefficient data; expanded onto a
/// mesh by make_params.
struct UniformData {
    double rho_cp = 1.0;
    double alpha = 1.0;
    double A_s = 1.0;
    double k1 = 1.0;
    double T_a = 2.0;
    double d1 = 1.0;
    RegionValues k;
    RegionValues sigma_e;
    ElectrodeValues sigma_s;
    ElectrodeValues g1;
    std::optional<double> g0;  ///< defaults to min g1
    ElectrodeValues U{0.0, 0.0};
    double I_a = 0.0;
    double I_c = 0.0;
    double f_amplitude = 0.0;
    FieldProfile f_profile = FieldProfile::Sine;
    double u0 = 2.0;
    double u0_slope = 0.0;  ///< u0(x) = u0 + u0_slope * x
    HeatSourceForm heat_source_form = HeatSourceForm::Reduced;
    RobinSign robin_sign = RobinSign::Dissipative;
};

PhysicalParams make_params(const Mesh& mesh, const UniformData& data);

/// Samples a vector field f(x, y) into params.f_cell and params.f_normal.
/// Normal components on boundary faces are whatever the field gives there.
template <typename Fn>
void sample_vector_field(const Mesh& mesh, PhysicalParams& params, Fn&& fn)
{
    params.f_cell.clear();
    for (const Cell& c : mesh.cells())
        params.f_cell.push_back(fn(c.centroid[0], c.centroid[1]));
    params.f_normal.clear();
    for (const Face& f : mesh.faces())
        params.f_normal.push_back(dot(fn(f.centroid[0], f.centroid[1]), f.normal));
}

struct HypothesisCheck {
    std::string id;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;

    bool all_pass() const;
    const HypothesisCheck* find(const std::string& id) const;
    /// Human-readable report, one line per check.
    std::string to_text() const;
    /// key=value lines for the run log.
    std::string to_machine() const;
};

/// Checks H1-H7 and u0 positivity. Throws StructuralError when a field has the
/// wrong length or data is attached to the wrong part of the mesh.
ValidationReport validate_hypotheses(const PhysicalParams& params, const Mesh& mesh);

/// Throws StructuralError if any field does not match the mesh.
void check_structure(const PhysicalParams& params, const Mesh& mesh);

struct EpsilonBounds {
    double L0 = 0.0;
    double lower = 0.0;  ///< open interval (lower, upper)
    double upper = 0.0;

    bool admits(double eps) const { return eps > lower && eps < upper; }
};

/// L0 = min u0 and the admissible truncation interval (0, L0).
EpsilonBounds epsilon_bounds(std::span<const double> u0);

/// Exchange-current prefactor F k0 Ce^a (Cs_max - Cs_surf)^a Cs_surf^a from
/// frozen concentrations; an input-preparation helper for g1.
double exchange_current_prefactor(double faraday, double k0, double c_e, double c_s_max, double c_s_surf,
                                  double alpha);

}  // namespace tecell
