#pragma once

#include "tecell/config.hpp"
#include "tecell/coupled.hpp"
#include "tecell/elliptic.hpp"
#include "tecell/heat.hpp"
#include "tecell/mesh.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tecell {

/// Round-trip decimal form (%.17g) used in every output file.
std::string format_number(double value);

/// t, min_u, max_u, mean_u, sup_phis, sup_phie, picard_iters,
/// truncation_active, mean_sum, energy_residual
std::string time_series_header();
std::string time_series_csv(const SimulationResult& result);

/// cell_index, x[, y], region, u, phis (blank on the separator), phie
std::string field_snapshot(const Mesh& mesh, const TemperatureField& u, const PotentialPair& pot);

/// Same layout without the temperature column.
std::string potential_field(const Mesh& mesh, const PotentialPair& pot);

/// Accumulates titled plain-text sections.
class RunLog {
public:
    void section(const std::string& title, const std::string& body);
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string run_summary(const SimulationResult& result);

struct WrittenFiles {
    std::filesystem::path csv;
    std::vector<std::filesystem::path> fields;
    std::filesystem::path log;
};

/// Writes the CSV series, field snapshots every `stride` steps (and the last
/// one), and the run log into `directory`, creating it if needed.
WrittenFiles write_run_outputs(const std::filesystem::path& directory, const Mesh& mesh,
                               const SimulationResult& result, const OutputConfig& output, const RunLog& log);

}  // namespace tecell
