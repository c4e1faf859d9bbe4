#include "tecell/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tecell {

std::string format_number(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string time_series_header()
{
    return "t,min_u,max_u,mean_u,sup_phis,sup_phie,picard_iters,truncation_active,mean_sum,energy_residual\n";
}

std::string time_series_csv(const SimulationResult& result)
{
    std::string out = time_series_header();
    for (const StepDiagnostics& d : result.diagnostics) {
        out += format_number(d.time) + ',' + format_number(d.min_u) + ',' + format_number(d.max_u) + ',' +
               format_number(d.mean_u) + ',' + format_number(d.sup_phis) + ',' + format_number(d.sup_phie) + ',' +
               std::to_string(d.picard_iters) + ',' + (d.truncation_active ? "1" : "0") + ',' +
               format_number(d.mean_sum) + ',' + format_number(d.energy_residual) + '\n';
    }
    return out;
}

namespace {

std::string field_text(const Mesh& mesh, const TemperatureField* u, const PotentialPair& pot)
{
    const bool two_d = mesh.dimension() == 2;
    std::string out = two_d ? "cell_index,x,y,region" : "cell_index,x,region";
    out += u ? ",u,phis,phie\n" : ",phis,phie\n";
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cell(static_cast<int>(c));
        out += std::to_string(c) + ',' + format_number(cell.centroid[0]) + ',';
        if (two_d)
            out += format_number(cell.centroid[1]) + ',';
        out += std::string(to_string(cell.region)) + ',';
        if (u)
            out += format_number(u->values[c]) + ',';
        const int e = mesh.electrode_index(static_cast<int>(c));
        if (e >= 0)
            out += format_number(pot.phis[static_cast<std::size_t>(e)]);
        out += ',' + format_number(pot.phie[c]) + '\n';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

std::string field_snapshot(const Mesh& mesh, const TemperatureField& u, const PotentialPair& pot)
{
    return field_text(mesh, &u, pot);
}

std::string potential_field(const Mesh& mesh, const PotentialPair& pot) { return field_text(mesh, nullptr, pot); }

void RunLog::section(const std::string& title, const std::string& body)
{
    text_ += "[" + title + "]\n" + body;
    if (!body.empty() && body.back() != '\n')
        text_ += '\n';
    text_ += '\n';
}

std::string run_summary(const SimulationResult& result)
{
    std::ostringstream out;
    out << "steps = " << (result.times.empty() ? 0 : result.times.size() - 1) << '\n';
    out << "final_time = " << format_number(result.times.empty() ? 0.0 : result.times.back()) << '\n';
    if (result.t_star.horizon)
        out << "t_star = horizon\n";
    else
        out << "t_star = " << format_number(result.t_star.time) << '\n';
    if (!result.t_star_step.horizon && result.t_star_step.time != result.t_star.time)
        out << "t_star_step = " << format_number(result.t_star_step.time) << '\n';
    bool positivity = false;
    bool saturated = false;
    for (const StepDiagnostics& d : result.diagnostics) {
        positivity = positivity || d.positivity_violation;
        saturated = saturated || d.kernel_saturated;
    }
    out << "positivity_violation = " << (positivity ? "yes" : "no") << '\n';
    out << "kernel_saturated = " << (saturated ? "yes" : "no") << '\n';
    out << "completed = " << (result.completed ? "yes" : "no") << '\n';
    if (!result.completed)
        out << "failure = " << result.failure << '\n';
    return out.str();
}

WrittenFiles write_run_outputs(const std::filesystem::path& directory, const Mesh& mesh,
                               const SimulationResult& result, const OutputConfig& output, const RunLog& log)
{
    std::filesystem::create_directories(directory);
    WrittenFiles files;
    if (output.csv) {
        files.csv = directory / "timeseries.csv";
        write_file(files.csv, time_series_csv(result));
    }
    if (output.fields) {
        const std::size_t count = result.temperatures.size();
        const auto stride = static_cast<std::size_t>(output.snapshot_stride);
        for (std::size_t n = 0; n < count; ++n) {
            if (n % stride != 0 && n + 1 != count)
                continue;
            char name[32];
            std::snprintf(name, sizeof name, "field_%05zu.csv", n);
            const auto path = directory / name;
            write_file(path, "# t = " + format_number(result.times[n]) + "\n" +
                                 field_snapshot(mesh, result.temperatures[n], result.potentials[n]));
            files.fields.push_back(path);
        }
    }
    if (output.run_log) {
        files.log = directory / "run.log";
        write_file(files.log, log.text());
    }
    return files;
}

}  // namespace tecell
