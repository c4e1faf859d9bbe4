#pragma once

#include "tecell/elliptic.hpp"
#include "tecell/mesh.hpp"
#include "tecell/params.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tecell {

/// Manufactured temperature u*(x, t) = T_a + a(t) cos(pi x / L) on the 1D
/// sandwich. The exact field has zero normal derivative at both ends, so the
/// Robin data is fed with w = T_a.
struct HeatMms {
    SandwichLengths lengths;
    double rho_cp = 1.0;
    double k = 1.0;
    double T_a = 0.0;
    std::function<double(double)> amplitude;        ///< a(t)
    std::function<double(double)> amplitude_rate;   ///< a'(t)

    double length() const { return lengths.anode + lengths.separator + lengths.cathode; }
    double exact(double x, double t) const;
    double forcing(double x, double t) const;
    UniformData data() const;
};

/// Manufactured potentials on the 1D sandwich with u = u0 = 1:
///   phi_e* = c_e cos(pi x / L)
///   phi_s* = offset + c_s cos(pi s / L_r) + b s'^2 per electrode
/// where the quadratic carries the applied current. The kernel is evaluated
/// at the exact fields and folded into the cell forcings.
struct PotentialMms {
    SandwichLengths lengths;
    UniformData data;
    double tau = 0.0;
    double delta = 1.0;
    double eps = 0.5;

    double exact_phis(double x) const;
    double exact_phie(double x) const;
    /// Cell integrals of the strong-form operators at the exact fields.
    PotentialForcing forcing(const Mesh& mesh) const;
    /// Exact pair sampled at the cell centroids.
    PotentialPair sampled(const Mesh& mesh) const;
    /// |sum of forcings - (tau * integral of the exact fields - delta * sum I|f|)|.
    double compatibility_residual(const Mesh& mesh) const;
};

struct MmsCase {
    std::string id;
    std::string description;
    std::optional<HeatMms> heat;
    std::optional<PotentialMms> potential;
};

/// Registered ids: "heat", "heat-time", "potential". Throws
/// std::invalid_argument for anything else.
MmsCase mms_case(const std::string& id);
std::vector<std::string> mms_catalog();

struct RefinementRow {
    double h = 0.0;
    double dt = 0.0;
    double error = 0.0;
};

struct RefinementStudy {
    std::string case_id;
    std::string axis;  ///< "space" or "time"
    std::vector<RefinementRow> rows;
    double rate = 0.0;
};

/// Max-norm error at the final time under mesh refinement (cells scale by
/// `levels` multipliers) with a fixed step.
RefinementStudy heat_space_study(const HeatMms& mms, const std::string& id, std::vector<int> multipliers,
                                 double dt, double horizon);

/// Max-norm error at the final time under step refinement on a fixed mesh.
RefinementStudy heat_time_study(const HeatMms& mms, const std::string& id, int multiplier,
                                std::vector<double> steps, double horizon);

/// Max over rows of |residual| / |K| with the exact fields inserted.
RefinementStudy potential_space_study(const PotentialMms& mms, const std::string& id, std::vector<int> multipliers);

/// Runs the default study set for a case.
std::vector<RefinementStudy> default_studies(const MmsCase& c);

std::string render_study(const RefinementStudy& study);

/// Cells per region proportional to the region lengths: multiplier times
/// the base split.
SandwichCells proportional_cells(const SandwichLengths& lengths, int multiplier);

}  // namespace tecell
