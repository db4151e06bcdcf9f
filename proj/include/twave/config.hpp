#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "twave/grid.hpp"
#include "twave/reaction.hpp"

namespace twave {

/// Parse or validation failure; carries the 1-based line when one applies.
class ConfigParseError : public ConfigError {
public:
    ConfigParseError(const std::string& message, int line = 0);
    int line() const { return line_; }

private:
    int line_;
};

enum class Scenario { Wave, Converge, Gap, SecondarySpeed, Comparison, Hypotheses };

Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario s);

struct ModelSpec {
    std::string name = "cubic";  ///< cubic | cubic_heterogeneous | tristable | linear
    double a = 0.25;             ///< cubic threshold; mean threshold when heterogeneous
    double a_variation = 0.0;    ///< heterogeneous amplitude of the cos profile
    double a1 = 0.15, b = 0.5, a2 = 0.75, k = 20.0;  ///< tristable
};

ReactionModel build_model(const ModelSpec& spec, const GridConfig& grid);

/// Initial data. "front" is a tanh front times an optional dip factor plus an
/// optional bump; "plateau_noise" is a step with uniform noise; "sandwich"
/// is the front bracketed by translates of the wave.
struct InitialSpec {
    std::string family = "front";
    double amplitude = 1.0;
    double width = 2.0;
    double offset = 0.0;
    double dip_level = 1.0;  ///< 1 disables the dip
    double dip_edge = -10.0;
    double dip_width = 1.0;
    double bump_amplitude = 0.0;
    double bump_center = 12.0;
    double bump_width = 1.5;
    double noise = 0.0;
    double alpha = 0.1;           ///< allowed shortfall of the left plateau below v
    double sandwich_shift = 10.0; ///< R of the barrier pair
};

struct RunSpec {
    double dt = 0.05;
    double horizon = 60.0;
    double c_seed = 0.2;
    double plateau_seed = 1.0;  ///< constant seed for the cross-section plateau search
    double delta = 0.05;        ///< z_delta threshold
    int pairs = 200;            ///< randomized pairs for the comparison scenario
    double pair_horizon = 10.0; ///< integration time of each random pair
    std::uint64_t seed = 1;
    std::string out = "out";
};

struct ExperimentConfig {
    Scenario scenario = Scenario::Wave;
    GridConfig grid;
    ModelSpec model;
    InitialSpec initial;
    RunSpec run;
    /// Every key as given, "section.key" -> text, in file order of sections.
    std::vector<std::pair<std::string, std::string>> echo;
};

/// Strict parse of an INI-like text: [section] headers, key = value lines,
/// '#' or ';' comments. Unknown sections or keys, duplicates and bad values
/// are errors with line numbers. The result is validated (see validate_config).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// horizon > 0, 0 < dt <= dt_max, grid and model buildable, names resolvable.
void validate_config(const ExperimentConfig& config);

/// Human-readable list of every key with its default.
std::string config_reference();

/// u0 from the descriptor ("front" and "plateau_noise"; "sandwich" uses the
/// front for its middle member). Noise is drawn from a generator seeded by run.seed.
Field build_initial(const ExperimentConfig& config, const GridPtr& grid);

}  // namespace twave
