#ifndef GBBMB_CONFIG_HPP
#define GBBMB_CONFIG_HPP

#include <cctype>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbbmb/fd.hpp"
#include "gbbmb/network.hpp"

namespace gbbmb {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
    ConfigError(std::size_t line, const std::string& msg)
        : std::runtime_error("config line " + std::to_string(line) + ": " + msg) {}
};

enum class InitialKind { SolitaryWave, Zero, SampledFromFile };

struct InitialCondition {
    InitialKind kind = InitialKind::Zero;
    double c = 2.0;
    double x0 = 60.0;           // physical coordinate on the host edge; the
                                // junction sits at x = truncation_length
    std::size_t host_edge = 1;  // 1-based, normally the incoming edge
    std::string path;           // for SampledFromFile
};

struct OutputOptions {
    std::size_t stride = 40;
    bool fields = false;
    std::string out_dir = "out";
};

/// Everything needed to reproduce one run: network, grid, initial data,
/// bootstrap choice, and output knobs. Parsed from a flat key = value file
/// with one [edge] section per edge.
struct ExperimentConfig {
    std::vector<EdgeSpec> edges;
    int p = 1;
    JunctionCondition junction = JunctionCondition::MassConservation;
    GridSpec grid{0.025, 0.025, 40.0};
    InitialCondition initial;
    OutputOptions output;
    BootstrapMode bootstrap = BootstrapMode::SemiImplicit;

    StarNetwork network() const { return StarNetwork(edges, p, junction); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_real(const std::string& v, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
}

inline long parse_int(const std::string& v, std::size_t line) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& v, std::size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

inline void apply_edge_key(EdgeSpec& e, const std::string& key,
                           const std::string& value, std::size_t line) {
    if (key == "orientation") {
        if (value == "incoming")
            e.orientation = Orientation::Incoming;
        else if (value == "outgoing")
            e.orientation = Orientation::Outgoing;
        else
            throw ConfigError(line, "orientation must be incoming or outgoing");
    } else if (key == "mu")
        e.mu = parse_real(value, line);
    else if (key == "alpha")
        e.alpha = parse_real(value, line);
    else if (key == "gamma")
        e.gamma = parse_real(value, line);
    else if (key == "nu")
        e.nu = parse_real(value, line);
    else if (key == "length")
        e.truncation_length = parse_real(value, line);
    else
        throw ConfigError(line, "unknown edge field '" + key + "'");
}

inline void apply_key(ExperimentConfig& cfg, const std::string& section,
                      std::size_t edge_index, const std::string& key,
                      const std::string& value, std::size_t line) {
    if (section == "edge") {
        if (edge_index >= cfg.edges.size())
            throw ConfigError(line, "edge field outside an [edge] section");
        apply_edge_key(cfg.edges[edge_index], key, value, line);
    } else if (section == "network") {
        if (key == "p")
            cfg.p = static_cast<int>(parse_int(value, line));
        else if (key == "junction") {
            if (value == "mass_conservation")
                cfg.junction = JunctionCondition::MassConservation;
            else if (value == "kirchhoff")
                cfg.junction = JunctionCondition::Kirchhoff;
            else
                throw ConfigError(line,
                                  "junction must be mass_conservation or kirchhoff");
        } else
            throw ConfigError(line, "unknown network field '" + key + "'");
    } else if (section == "grid") {
        if (key == "dx")
            cfg.grid.dx = parse_real(value, line);
        else if (key == "dt")
            cfg.grid.dt = parse_real(value, line);
        else if (key == "horizon")
            cfg.grid.horizon = parse_real(value, line);
        else
            throw ConfigError(line, "unknown grid field '" + key + "'");
    } else if (section == "initial") {
        if (key == "type") {
            if (value == "solitary_wave")
                cfg.initial.kind = InitialKind::SolitaryWave;
            else if (value == "zero")
                cfg.initial.kind = InitialKind::Zero;
            else if (value == "from_file")
                cfg.initial.kind = InitialKind::SampledFromFile;
            else
                throw ConfigError(line, "unknown initial type '" + value + "'");
        } else if (key == "c")
            cfg.initial.c = parse_real(value, line);
        else if (key == "x0")
            cfg.initial.x0 = parse_real(value, line);
        else if (key == "host_edge") {
            const long h = parse_int(value, line);
            if (h < 1) throw ConfigError(line, "host_edge is 1-based");
            cfg.initial.host_edge = static_cast<std::size_t>(h);
        } else if (key == "path")
            cfg.initial.path = value;
        else
            throw ConfigError(line, "unknown initial field '" + key + "'");
    } else if (section == "output") {
        if (key == "stride") {
            const long s = parse_int(value, line);
            if (s < 1) throw ConfigError(line, "stride must be >= 1");
            cfg.output.stride = static_cast<std::size_t>(s);
        } else if (key == "fields")
            cfg.output.fields = parse_bool(value, line);
        else if (key == "dir")
            cfg.output.out_dir = value;
        else
            throw ConfigError(line, "unknown output field '" + key + "'");
    } else if (section == "bootstrap") {
        if (key == "mode") {
            if (value == "exact_translate")
                cfg.bootstrap = BootstrapMode::ExactTranslate;
            else if (value == "semi_implicit")
                cfg.bootstrap = BootstrapMode::SemiImplicit;
            else
                throw ConfigError(line, "unknown bootstrap mode '" + value + "'");
        } else
            throw ConfigError(line, "unknown bootstrap field '" + key + "'");
    } else
        throw ConfigError(line, "unknown section [" + section + "]");
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.edges.clear();
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t edge_index = static_cast<std::size_t>(-1);
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, "malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section == "edge") {
                cfg.edges.emplace_back();
                edge_index = cfg.edges.size() - 1;
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError(line_no, "key '" + key + "' outside any section");
        detail::apply_key(cfg, section, edge_index, key, value, line_no);
    }
    if (cfg.edges.empty()) throw ConfigError("config defines no [edge] sections");
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Applies a dotted override, e.g. "edge2.mu=1.5", "grid.dt=0.0125",
/// "initial.c=5". Edge sections are addressed as edgeN with 1-based N.
inline void apply_override(ExperimentConfig& cfg, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + spec + "' must be key=value");
    const std::string path = detail::trim(spec.substr(0, eq));
    const std::string value = detail::trim(spec.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos)
        throw ConfigError("override key '" + path + "' must be section.field");
    std::string section = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    std::size_t edge_index = static_cast<std::size_t>(-1);
    if (section.rfind("edge", 0) == 0 && section.size() > 4) {
        const long n = detail::parse_int(section.substr(4), 0);
        if (n < 1 || static_cast<std::size_t>(n) > cfg.edges.size())
            throw ConfigError("override addresses nonexistent edge " + section);
        edge_index = static_cast<std::size_t>(n - 1);
        section = "edge";
    }
    detail::apply_key(cfg, section, edge_index, key, value, 0);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "[network]\n";
    out << "p = " << cfg.p << "\n";
    out << "junction = "
        << (cfg.junction == JunctionCondition::MassConservation
                ? "mass_conservation"
                : "kirchhoff")
        << "\n\n";
    for (const EdgeSpec& e : cfg.edges) {
        out << "[edge]\n";
        out << "orientation = "
            << (e.orientation == Orientation::Incoming ? "incoming" : "outgoing")
            << "\n";
        out << "mu = " << e.mu << "\n";
        out << "alpha = " << e.alpha << "\n";
        out << "gamma = " << e.gamma << "\n";
        out << "nu = " << e.nu << "\n";
        out << "length = " << e.truncation_length << "\n\n";
    }
    out << "[grid]\n";
    out << "dx = " << cfg.grid.dx << "\n";
    out << "dt = " << cfg.grid.dt << "\n";
    out << "horizon = " << cfg.grid.horizon << "\n\n";
    out << "[initial]\n";
    switch (cfg.initial.kind) {
    case InitialKind::SolitaryWave: out << "type = solitary_wave\n"; break;
    case InitialKind::Zero: out << "type = zero\n"; break;
    case InitialKind::SampledFromFile:
        out << "type = from_file\npath = " << cfg.initial.path << "\n";
        break;
    }
    if (cfg.initial.kind == InitialKind::SolitaryWave) {
        out << "c = " << cfg.initial.c << "\n";
        out << "x0 = " << cfg.initial.x0 << "\n";
        out << "host_edge = " << cfg.initial.host_edge << "\n";
    }
    out << "\n[output]\n";
    out << "stride = " << cfg.output.stride << "\n";
    out << "fields = " << (cfg.output.fields ? "true" : "false") << "\n";
    out << "dir = " << cfg.output.out_dir << "\n\n";
    out << "[bootstrap]\n";
    out << "mode = "
        << (cfg.bootstrap == BootstrapMode::ExactTranslate ? "exact_translate"
                                                           : "semi_implicit")
        << "\n";
    return out.str();
}

} // namespace gbbmb

#endif
