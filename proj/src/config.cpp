#include "tecell/config.hpp"

#include "tecell/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tecell {

std::string_view to_string(RunMode mode)
{
    switch (mode) {
    case RunMode::Run: return "run";
    case RunMode::Validate: return "validate";
    case RunMode::Mms: return "mms";
    case RunMode::SweepTau: return "sweep-tau";
    case RunMode::OracleCompare: return "oracle-compare";
    }
    return "run";
}

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Where {
    int line;
    std::string key;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("line " + std::to_string(line) + ": " + what);
    }
};

double to_double(const std::string& v, const Where& at)
{
    double out = 0.0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty())
        at.fail(at.key + " expects a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& v, const Where& at)
{
    int out = 0;
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || v.empty())
        at.fail(at.key + " expects an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v, const Where& at)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    at.fail(at.key + " expects true or false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, sep))
        out.push_back(trim(item));
    return out;
}

double positive(double v, const Where& at)
{
    if (!(v > 0.0))
        at.fail(at.key + " must be positive");
    return v;
}

template <typename E>
E to_enum(const std::string& v, const Where& at, std::initializer_list<std::pair<const char*, E>> options)
{
    std::string allowed;
    for (const auto& [name, value] : options) {
        if (v == name)
            return value;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    at.fail(at.key + " must be one of " + allowed + ", got '" + v + "'");
}

template <typename E>
std::string from_enum(E value, std::initializer_list<std::pair<const char*, E>> options)
{
    for (const auto& [name, v] : options)
        if (v == value)
            return name;
    return "?";
}

using Setter = std::function<void(RunConfig&, const std::string&, const Where&)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Key {
    std::string name;
    Setter set;
    Getter get;
    bool required = false;
};

template <typename Field>
Key real_key(std::string name, Field field, bool must_be_positive = false, bool required = false)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) {
                const double x = to_double(v, at);
                field(c) = must_be_positive ? positive(x, at) : x;
            },
            [=](const RunConfig& c) -> std::optional<std::string> { return num(field(c)); },
            required};
}

template <typename Field>
Key int_key(std::string name, Field field, bool required = false)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) { field(c) = to_int(v, at); },
            [=](const RunConfig& c) -> std::optional<std::string> {
                return std::to_string(field(c));
            },
            required};
}

template <typename Field>
Key bool_key(std::string name, Field field)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) { field(c) = to_bool(v, at); },
            [=](const RunConfig& c) -> std::optional<std::string> {
                return field(c) ? std::string("true") : std::string("false");
            },
            false};
}

/// Sets both electrodes (and the separator) at once.
Key region_key(std::string name, RegionValues UniformData::*member)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) {
                const double x = to_double(v, at);
                c.params.*member = {x, x, x};
            },
            [](const RunConfig&) -> std::optional<std::string> { return std::nullopt; }, false};
}

Key electrode_key(std::string name, ElectrodeValues UniformData::*member)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) {
                const double x = to_double(v, at);
                c.params.*member = {x, x};
            },
            [](const RunConfig&) -> std::optional<std::string> { return std::nullopt; }, false};
}

constexpr std::initializer_list<std::pair<const char*, FieldProfile>> kProfiles{{"sine", FieldProfile::Sine},
                                                                                {"constant", FieldProfile::Constant}};
constexpr std::initializer_list<std::pair<const char*, HeatSourceForm>> kForms{
    {"reduced", HeatSourceForm::Reduced}, {"overpotential", HeatSourceForm::Overpotential}};
constexpr std::initializer_list<std::pair<const char*, RobinSign>> kSigns{{"dissipative", RobinSign::Dissipative},
                                                                           {"literal", RobinSign::Literal}};
constexpr std::initializer_list<std::pair<const char*, TauMode>> kTauModes{{"zero", TauMode::ConstrainedZero},
                                                                            {"continuation", TauMode::Continuation}};
constexpr std::initializer_list<std::pair<const char*, OuterMode>> kOuterModes{{"per_step", OuterMode::PerStep},
                                                                                {"trajectory", OuterMode::Trajectory}};
constexpr std::initializer_list<std::pair<const char*, TStarRefinement>> kTStar{
    {"step", TStarRefinement::StepBoundary}, {"bisection", TStarRefinement::Bisection}};
constexpr std::initializer_list<std::pair<const char*, RunMode>> kModes{{"run", RunMode::Run},
                                                                         {"validate", RunMode::Validate},
                                                                         {"mms", RunMode::Mms},
                                                                         {"sweep-tau", RunMode::SweepTau},
                                                                         {"oracle-compare", RunMode::OracleCompare}};

template <typename E, typename Field>
Key enum_key(std::string name, Field field, std::initializer_list<std::pair<const char*, E>> options)
{
    return {std::move(name),
            [=](RunConfig& c, const std::string& v, const Where& at) { field(c) = to_enum(v, at, options); },
            [=](const RunConfig& c) -> std::optional<std::string> {
                return from_enum(field(c), options);
            },
            false};
}

const std::vector<Key>& schema()
{
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        // mesh
        k.push_back(real_key("mesh.L_a", [](auto& c) -> auto& { return c.mesh.lengths.anode; }, false, true));
        k.push_back(real_key("mesh.L_s", [](auto& c) -> auto& { return c.mesh.lengths.separator; }, false, true));
        k.push_back(real_key("mesh.L_c", [](auto& c) -> auto& { return c.mesh.lengths.cathode; }, false, true));
        k.push_back(int_key("mesh.n_a", [](auto& c) -> auto& { return c.mesh.cells.anode; }, true));
        k.push_back(int_key("mesh.n_s", [](auto& c) -> auto& { return c.mesh.cells.separator; }, true));
        k.push_back(int_key("mesh.n_c", [](auto& c) -> auto& { return c.mesh.cells.cathode; }, true));
        k.push_back({"mesh.width",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         if (!c.mesh.transverse)
                             c.mesh.transverse = TransverseExtent{};
                         c.mesh.transverse->width = to_double(v, at);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (!c.mesh.transverse)
                             return std::nullopt;
                         return num(c.mesh.transverse->width);
                     },
                     false});
        k.push_back({"mesh.n_y",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         if (!c.mesh.transverse)
                             c.mesh.transverse = TransverseExtent{};
                         c.mesh.transverse->cells = to_int(v, at);
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (!c.mesh.transverse)
                             return std::nullopt;
                         return std::to_string(c.mesh.transverse->cells);
                     },
                     false});

        // params: scalars
        auto p = [](auto member) {
            return [member](auto& c) -> auto& { return c.params.*member; };
        };
        k.push_back(real_key("params.rho_cp", p(&UniformData::rho_cp)));
        k.push_back(real_key("params.alpha", p(&UniformData::alpha)));
        k.push_back(real_key("params.A_s", p(&UniformData::A_s)));
        k.push_back(real_key("params.k1", p(&UniformData::k1)));
        k.push_back(real_key("params.T_a", p(&UniformData::T_a)));
        k.push_back(real_key("params.d1", p(&UniformData::d1)));
        k.push_back({"params.g0",
                     [](RunConfig& c, const std::string& v, const Where& at) { c.params.g0 = to_double(v, at); },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (!c.params.g0)
                             return std::nullopt;
                         return num(*c.params.g0);
                     },
                     false});
        // params: region-wise
        k.push_back(region_key("params.k", &UniformData::k));
        k.push_back(real_key("params.k_a", [](auto& c) -> auto& { return c.params.k.anode; }));
        k.push_back(real_key("params.k_s", [](auto& c) -> auto& { return c.params.k.separator; }));
        k.push_back(real_key("params.k_c", [](auto& c) -> auto& { return c.params.k.cathode; }));
        k.push_back(region_key("params.sigma_e", &UniformData::sigma_e));
        k.push_back(real_key("params.sigma_e_a", [](auto& c) -> auto& { return c.params.sigma_e.anode; }));
        k.push_back(real_key("params.sigma_e_s", [](auto& c) -> auto& { return c.params.sigma_e.separator; }));
        k.push_back(real_key("params.sigma_e_c", [](auto& c) -> auto& { return c.params.sigma_e.cathode; }));
        k.push_back(electrode_key("params.sigma_s", &UniformData::sigma_s));
        k.push_back(real_key("params.sigma_s_a", [](auto& c) -> auto& { return c.params.sigma_s.anode; }));
        k.push_back(real_key("params.sigma_s_c", [](auto& c) -> auto& { return c.params.sigma_s.cathode; }));
        k.push_back(electrode_key("params.g1", &UniformData::g1));
        k.push_back(real_key("params.g1_a", [](auto& c) -> auto& { return c.params.g1.anode; }));
        k.push_back(real_key("params.g1_c", [](auto& c) -> auto& { return c.params.g1.cathode; }));
        k.push_back(electrode_key("params.U", &UniformData::U));
        k.push_back(real_key("params.U_a", [](auto& c) -> auto& { return c.params.U.anode; }));
        k.push_back(real_key("params.U_c", [](auto& c) -> auto& { return c.params.U.cathode; }));
        k.push_back(real_key("params.I_a", p(&UniformData::I_a)));
        k.push_back(real_key("params.I_c", p(&UniformData::I_c)));
        k.push_back(real_key("params.f_amplitude", p(&UniformData::f_amplitude)));
        k.push_back(enum_key<FieldProfile>(
            "params.f_profile", [](auto& c) -> auto& { return c.params.f_profile; }, kProfiles));
        k.push_back(real_key("params.u0", p(&UniformData::u0)));
        k.push_back(real_key("params.u0_slope", p(&UniformData::u0_slope)));
        k.push_back(enum_key<HeatSourceForm>(
            "params.heat_source_form", [](auto& c) -> auto& { return c.params.heat_source_form; },
            kForms));
        k.push_back(enum_key<RobinSign>(
            "params.robin_sign", [](auto& c) -> auto& { return c.params.robin_sign; }, kSigns));
        k.push_back({"params.U_schedule",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         c.ocp_schedule.clear();
                         for (const std::string& entry : split(v, ',')) {
                             const auto parts = split(entry, ':');
                             if (parts.size() != 3)
                                 at.fail(at.key + " entries must read start:U_a:U_c, got '" + entry + "'");
                             c.ocp_schedule.push_back(
                                 {to_double(parts[0], at), to_double(parts[1], at), to_double(parts[2], at)});
                         }
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (c.ocp_schedule.empty())
                             return std::nullopt;
                         std::string s;
                         for (const OcpStep& e : c.ocp_schedule) {
                             if (!s.empty())
                                 s += ", ";
                             s += num(e.start_time) + ":" + num(e.anode) + ":" + num(e.cathode);
                         }
                         return s;
                     },
                     false});

        // solver
        auto s = [](auto member) {
            return [member](auto& c) -> auto& { return c.solver.*member; };
        };
        k.push_back(enum_key<TauMode>(
            "solver.tau_mode", [](auto& c) -> auto& { return c.solver.tau_mode; }, kTauModes));
        k.push_back({"solver.tau_sequence",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         c.solver.tau_sequence.clear();
                         for (const std::string& item : split(v, ','))
                             c.solver.tau_sequence.push_back(positive(to_double(item, at), at));
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         std::string out;
                         for (double t : c.solver.tau_sequence)
                             out += (out.empty() ? "" : ", ") + num(t);
                         return out;
                     },
                     false});
        k.push_back({"solver.delta",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         const double d = to_double(v, at);
                         if (!(d > 0.0 && d <= 1.0))
                             at.fail(at.key + " must lie in (0, 1]");
                         c.solver.delta = d;
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return num(c.solver.delta); }, false});
        k.push_back(real_key("solver.nonlinear_tol", [](auto& c) -> auto& { return c.solver.nonlinear.tol; },
                             true));
        k.push_back(int_key("solver.nonlinear_max_iters",
                            [](auto& c) -> auto& { return c.solver.nonlinear.max_iters; }));
        k.push_back(real_key("solver.picard_tol", s(&SolverSettings::picard_tol), true));
        k.push_back(int_key("solver.picard_max_iters", s(&SolverSettings::picard_max_iters)));
        k.push_back({"solver.picard_relaxation",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         const double w = to_double(v, at);
                         if (!(w > 0.0 && w <= 1.0))
                             at.fail(at.key + " must lie in (0, 1]");
                         c.solver.picard_relaxation = w;
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return num(c.solver.picard_relaxation); },
                     false});
        k.push_back(real_key("solver.dt", s(&SolverSettings::dt), true));
        k.push_back(real_key("solver.T", s(&SolverSettings::horizon), true));
        k.push_back({"solver.eps",
                     [](RunConfig& c, const std::string& v, const Where& at) { c.eps = positive(to_double(v, at), at); },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         if (!c.eps)
                             return std::nullopt;
                         return num(*c.eps);
                     },
                     false});
        k.push_back(real_key("solver.overflow_ceiling", s(&SolverSettings::overflow_ceiling), true));
        k.push_back(enum_key<OuterMode>(
            "solver.outer_mode", [](auto& c) -> auto& { return c.solver.outer_mode; }, kOuterModes));
        k.push_back(enum_key<TStarRefinement>(
            "solver.tstar", [](auto& c) -> auto& { return c.solver.tstar_refinement; }, kTStar));

        // output
        k.push_back({"output.directory",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         if (v.empty())
                             at.fail(at.key + " must not be empty");
                         c.output.directory = v;
                     },
                     [](const RunConfig& c) -> std::optional<std::string> { return c.output.directory; }, false});
        k.push_back({"output.snapshot_stride",
                     [](RunConfig& c, const std::string& v, const Where& at) {
                         const int n = to_int(v, at);
                         if (n <= 0)
                             at.fail(at.key + " must be positive");
                         c.output.snapshot_stride = n;
                     },
                     [](const RunConfig& c) -> std::optional<std::string> {
                         return std::to_string(c.output.snapshot_stride);
                     },
                     false});
        k.push_back(bool_key("output.csv", [](auto& c) -> auto& { return c.output.csv; }));
        k.push_back(bool_key("output.fields", [](auto& c) -> auto& { return c.output.fields; }));
        k.push_back(bool_key("output.run_log", [](auto& c) -> auto& { return c.output.run_log; }));

        k.push_back(enum_key<RunMode>("mode", [](auto& c) -> auto& { return c.mode; }, kModes));
        return k;
    }();
    return keys;
}

}  // namespace

RunConfig parse_config(std::string_view text)
{
    RunConfig config;
    std::map<std::string, int> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(std::string_view(raw).substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            Where{line_no, ""}.fail("expected 'section.key = value', got '" + line + "'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const Where at{line_no, key};
        const auto& keys = schema();
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.name == key; });
        if (it == keys.end())
            at.fail("unknown key '" + key + "'");
        if (const auto prev = seen.find(key); prev != seen.end())
            at.fail("duplicate key '" + key + "' (first set on line " + std::to_string(prev->second) + ")");
        seen.emplace(key, line_no);
        it->set(config, value, at);
    }
    for (const Key& k : schema()) {
        if (k.required && !seen.contains(k.name))
            throw ConfigError("missing required key '" + k.name + "'");
    }
    if (config.mesh.transverse && (!seen.contains("mesh.width") || !seen.contains("mesh.n_y")))
        throw ConfigError("mesh.width and mesh.n_y must be given together");
    return config;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

Mesh build_mesh(const RunConfig& config)
{
    return build_sandwich_mesh(config.mesh.lengths, config.mesh.cells, config.mesh.transverse);
}

PhysicalParams build_params(const RunConfig& config, const Mesh& mesh)
{
    PhysicalParams p = make_params(mesh, config.params);
    for (const OcpStep& step : config.ocp_schedule) {
        OcpScheduleEntry entry;
        entry.start_time = step.start_time;
        for (int cell : mesh.electrode_cells())
            entry.values.push_back(mesh.cell(cell).region == Region::Anode ? step.anode : step.cathode);
        p.U_schedule.push_back(std::move(entry));
    }
    return p;
}

SolverSettings resolved_settings(const RunConfig& config, const PhysicalParams& params)
{
    SolverSettings s = config.solver;
    const double L0 = *std::min_element(params.u0.begin(), params.u0.end());
    s.eps = config.eps.value_or(0.5 * L0);
    s.validate(L0);
    return s;
}

std::string config_echo(const RunConfig& config)
{
    std::string out;
    for (const Key& k : schema()) {
        if (const auto v = k.get(config))
            out += k.name + " = " + *v + "\n";
    }
    return out;
}

}  // namespace tecell
