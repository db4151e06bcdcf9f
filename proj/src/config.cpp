#include "twave/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "twave/evolution.hpp"

namespace twave {

namespace {

std::string at_line(const std::string& msg, int line) {
    return line > 0 ? "line " + std::to_string(line) + ": " + msg : msg;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(std::string_view v, const std::string& key, int line) {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
        throw ConfigParseError(key + ": expected a finite number, got '" + std::string(v) + "'", line);
    return x;
}

template <class Int>
Int to_int(std::string_view v, const std::string& key, int line) {
    Int x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigParseError(key + ": expected an integer, got '" + std::string(v) + "'", line);
    return x;
}

struct Key {
    std::string name;  ///< section.key
    std::string default_text;
    std::string help;
    std::function<void(ExperimentConfig&, std::string_view, int)> set;
};

#define TWAVE_DOUBLE(section, key, member, help)                                                             \
    Key {                                                                                                     \
        section "." #key, fmt_default(ExperimentConfig{}.member), help,                                      \
            [](ExperimentConfig& c, std::string_view v, int line) { c.member = to_double(v, section "." #key, line); } \
    }

std::string fmt_default(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
std::string fmt_default(int v) { return std::to_string(v); }
std::string fmt_default(std::uint64_t v) { return std::to_string(v); }
std::string fmt_default(const std::string& v) { return v; }
std::string fmt_default(BoundaryKind k) { return std::string(to_string(k)); }

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back({"scenario.name", "wave", "wave | converge | gap | secondary_speed | comparison | hypotheses",
                     [](ExperimentConfig& c, std::string_view v, int line) {
                         try {
                             c.scenario = parse_scenario(v);
                         } catch (const ConfigError& e) {
                             throw ConfigParseError(e.what(), line);
                         }
                     }});
        k.push_back({"grid.n_y", fmt_default(ExperimentConfig{}.grid.n_y), "cross-section nodes (1 = pure 1D)",
                     [](ExperimentConfig& c, std::string_view v, int line) { c.grid.n_y = to_int<int>(v, "grid.n_y", line); }});
        k.push_back({"grid.n_z", fmt_default(ExperimentConfig{}.grid.n_z), "axial nodes",
                     [](ExperimentConfig& c, std::string_view v, int line) { c.grid.n_z = to_int<int>(v, "grid.n_z", line); }});
        k.push_back(TWAVE_DOUBLE("grid", y_min, grid.y_min, "cross-section start"));
        k.push_back(TWAVE_DOUBLE("grid", y_max, grid.y_max, "cross-section end"));
        k.push_back(TWAVE_DOUBLE("grid", z_min, grid.z_min, "window start"));
        k.push_back(TWAVE_DOUBLE("grid", z_max, grid.z_max, "window end"));
        auto bc = [](const char* name, BoundaryKind GridConfig::* member, const char* help) {
            return Key{std::string("grid.") + name, fmt_default(GridConfig{}.*member), help,
                       [member, name](ExperimentConfig& c, std::string_view v, int line) {
                           try {
                               c.grid.*member = parse_boundary(v);
                           } catch (const ConfigError& e) {
                               throw ConfigParseError(std::string("grid.") + name + ": " + e.what(), line);
                           }
                       }};
        };
        k.push_back(bc("bc_left", &GridConfig::bc_left, "dirichlet | neumann at y_min"));
        k.push_back(bc("bc_right", &GridConfig::bc_right, "dirichlet | neumann at y_max"));
        k.push_back(bc("bc_z_lo", &GridConfig::bc_z_lo, "plateau | neumann at z_min"));
        k.push_back(bc("bc_z_hi", &GridConfig::bc_z_hi, "dirichlet | neumann at z_max"));
        k.push_back({"model.name", "cubic", "cubic | cubic_heterogeneous | tristable | linear",
                     [](ExperimentConfig& c, std::string_view v, int) { c.model.name = std::string(v); }});
        k.push_back(TWAVE_DOUBLE("model", a, model.a, "cubic threshold"));
        k.push_back(TWAVE_DOUBLE("model", a_variation, model.a_variation, "threshold variation across the section"));
        k.push_back(TWAVE_DOUBLE("model", a1, model.a1, "tristable lower threshold"));
        k.push_back(TWAVE_DOUBLE("model", b, model.b, "tristable middle state"));
        k.push_back(TWAVE_DOUBLE("model", a2, model.a2, "tristable upper threshold"));
        k.push_back(TWAVE_DOUBLE("model", k, model.k, "tristable scale"));
        k.push_back({"initial.family", "front", "front | plateau_noise | sandwich",
                     [](ExperimentConfig& c, std::string_view v, int) { c.initial.family = std::string(v); }});
        k.push_back(TWAVE_DOUBLE("initial", amplitude, initial.amplitude, "left level of the front"));
        k.push_back(TWAVE_DOUBLE("initial", width, initial.width, "tanh width (inverse steepness)"));
        k.push_back(TWAVE_DOUBLE("initial", offset, initial.offset, "front position"));
        k.push_back(TWAVE_DOUBLE("initial", dip_level, initial.dip_level, "factor far left of dip_edge (1 = none)"));
        k.push_back(TWAVE_DOUBLE("initial", dip_edge, initial.dip_edge, "where the dip ends"));
        k.push_back(TWAVE_DOUBLE("initial", dip_width, initial.dip_width, "width of the dip edge"));
        k.push_back(TWAVE_DOUBLE("initial", bump_amplitude, initial.bump_amplitude, "Gaussian bump ahead of the front"));
        k.push_back(TWAVE_DOUBLE("initial", bump_center, initial.bump_center, "bump center"));
        k.push_back(TWAVE_DOUBLE("initial", bump_width, initial.bump_width, "bump width"));
        k.push_back(TWAVE_DOUBLE("initial", noise, initial.noise, "uniform noise amplitude"));
        k.push_back(TWAVE_DOUBLE("initial", alpha, initial.alpha, "allowed shortfall of the left plateau below v"));
        k.push_back(TWAVE_DOUBLE("initial", sandwich_shift, initial.sandwich_shift, "translation R of the barrier pair"));
        k.push_back(TWAVE_DOUBLE("run", dt, run.dt, "time step, at most 0.5 / max|f_u|"));
        k.push_back(TWAVE_DOUBLE("run", horizon, run.horizon, "final time"));
        k.push_back(TWAVE_DOUBLE("run", c_seed, run.c_seed, "initial frame speed of the wave solver"));
        k.push_back(TWAVE_DOUBLE("run", plateau_seed, run.plateau_seed, "constant seed of the plateau search"));
        k.push_back(TWAVE_DOUBLE("run", delta, run.delta, "z_delta threshold"));
        k.push_back({"run.pairs", fmt_default(ExperimentConfig{}.run.pairs), "random ordered pairs (comparison)",
                     [](ExperimentConfig& c, std::string_view v, int line) { c.run.pairs = to_int<int>(v, "run.pairs", line); }});
        k.push_back(TWAVE_DOUBLE("run", pair_horizon, run.pair_horizon, "integration time of each random pair"));
        k.push_back({"run.seed", fmt_default(ExperimentConfig{}.run.seed), "RNG seed for noise and random pairs",
                     [](ExperimentConfig& c, std::string_view v, int line) {
                         c.run.seed = to_int<std::uint64_t>(v, "run.seed", line);
                     }});
        k.push_back({"run.out", ExperimentConfig{}.run.out, "output directory (the CLI --out wins)",
                     [](ExperimentConfig& c, std::string_view v, int) { c.run.out = std::string(v); }});
        return k;
    }();
    return keys;
}

#undef TWAVE_DOUBLE

const Key* find_key(const std::string& name) {
    for (const auto& k : registry())
        if (k.name == name) return &k;
    return nullptr;
}

}  // namespace

ConfigParseError::ConfigParseError(const std::string& message, int line)
    : ConfigError(at_line(message, line)), line_(line) {}

Scenario parse_scenario(std::string_view name) {
    if (name == "wave") return Scenario::Wave;
    if (name == "converge") return Scenario::Converge;
    if (name == "gap") return Scenario::Gap;
    if (name == "secondary_speed" || name == "secondary-speed") return Scenario::SecondarySpeed;
    if (name == "comparison" || name == "compare") return Scenario::Comparison;
    if (name == "hypotheses" || name == "check-hypotheses") return Scenario::Hypotheses;
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::Wave: return "wave";
        case Scenario::Converge: return "converge";
        case Scenario::Gap: return "gap";
        case Scenario::SecondarySpeed: return "secondary_speed";
        case Scenario::Comparison: return "comparison";
        case Scenario::Hypotheses: return "hypotheses";
    }
    return "?";
}

ReactionModel build_model(const ModelSpec& spec, const GridConfig& grid) {
    if (spec.name == "cubic") return cubic_bistable(spec.a);
    if (spec.name == "cubic_heterogeneous")
        return cubic_heterogeneous(spec.a, spec.a_variation, grid.y_min, grid.y_max);
    if (spec.name == "tristable") return tristable(spec.a1, spec.b, spec.a2, spec.k);
    if (spec.name == "linear") return linear_growth();
    throw ConfigError("unknown model '" + spec.name + "'");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::map<std::string, int> seen;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto h = line.find_first_of("#;"); h != std::string_view::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigParseError("unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "grid" && section != "model" && section != "scenario" && section != "initial" &&
                section != "run")
                throw ConfigParseError("unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigParseError("expected key = value", line_no);
        if (section.empty()) throw ConfigParseError("key outside of any section", line_no);
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const Key* k = find_key(key);
        if (!k) throw ConfigParseError("unknown key '" + key + "'", line_no);
        if (const auto it = seen.find(key); it != seen.end())
            throw ConfigParseError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) +
                                       ", again on line " + std::to_string(line_no) + ")",
                                   line_no);
        if (value.empty()) throw ConfigParseError(key + ": empty value", line_no);
        seen[key] = line_no;
        k->set(cfg, value, line_no);
        cfg.echo.emplace_back(key, std::string(value));
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigParseError& e) {
        throw ConfigParseError(path + ": " + e.what());
    }
}

void validate_config(const ExperimentConfig& c) {
    if (!(c.run.horizon > 0.0)) throw ConfigError("run.horizon must be positive");
    if (!(c.run.dt > 0.0)) throw ConfigError("run.dt must be positive");
    if (c.run.pairs < 1) throw ConfigError("run.pairs must be at least 1");
    if (!(c.run.pair_horizon > 0.0)) throw ConfigError("run.pair_horizon must be positive");
    if (!(c.run.delta > 0.0)) throw ConfigError("run.delta must be positive");
    if (c.initial.family != "front" && c.initial.family != "plateau_noise" && c.initial.family != "sandwich")
        throw ConfigError("unknown initial.family '" + c.initial.family + "'");
    if (!(c.initial.width > 0.0) || !(c.initial.dip_width > 0.0) || !(c.initial.bump_width > 0.0))
        throw ConfigError("initial widths must be positive");
    const GridPtr g = build_grid(c.grid);
    const ReactionModel model = build_model(c.model, c.grid);
    const double bound = dt_max(model, *g);
    if (c.run.dt > bound) {
        std::ostringstream os;
        os << "run.dt = " << c.run.dt << " exceeds dt_max = 0.5 / max|f_u| = " << bound;
        throw ConfigError(os.str());
    }
}

std::string config_reference() {
    std::ostringstream os;
    os << "Config keys ([section] key = value, defaults in parentheses):\n";
    for (const auto& k : registry()) os << "  " << k.name << " (" << k.default_text << ")  " << k.help << "\n";
    return os.str();
}

Field build_initial(const ExperimentConfig& c, const GridPtr& grid) {
    const auto& g = *grid;
    const auto& in = c.initial;
    Field u(grid);
    if (in.family == "plateau_noise") {
        std::mt19937_64 rng(c.run.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (int j = 0; j < g.n_y(); ++j)
            for (int i = 0; i < g.n_z(); ++i) {
                const double base = g.z(i) < in.offset ? in.amplitude : 0.0;
                u(j, i) = std::clamp(base + in.noise * unit(rng), 0.0, 1.0);
            }
        return apply_boundary(u);
    }
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i) {
            const double z = g.z(i);
            const double front = in.amplitude * 0.5 * (1.0 - std::tanh((z - in.offset) / in.width));
            const double dip = in.dip_level + (1.0 - in.dip_level) * 0.5 * (1.0 + std::tanh((z - in.dip_edge) / in.dip_width));
            const double bump = in.bump_amplitude * std::exp(-std::pow((z - in.bump_center) / in.bump_width, 2));
            u(j, i) = std::clamp(front * dip + bump, 0.0, 1.0);
        }
    return apply_boundary(u);
}

}  // namespace twave
