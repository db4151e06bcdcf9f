#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "twave/config.hpp"
#include "twave/front_tracker.hpp"

namespace twave {

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
    std::string note;
};

struct EmittedFile {
    std::string path;  ///< relative to the output directory
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    std::string scenario;
    std::string version;
    std::vector<std::pair<std::string, std::string>> config;
    double wall_time = 0.0;
    std::vector<std::pair<std::string, double>> summary;
    std::vector<Assertion> assertions;
    std::vector<EmittedFile> files;
    std::vector<std::string> notes;
    std::string error;  ///< set when the run stopped on an error

    bool all_pass() const;
};

/// Run one scenario, writing its files and manifest.json into out_dir.
/// On a module error the manifest is still written (with the error and the
/// files emitted so far) and the error is rethrown with the scenario name.
RunManifest run_scenario(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Significant digits for CSV output: TWAVE_PRECISION if set (1..17), else 17.
int output_precision();

/// CSV of a front trace with columns t,R,m,phi,dRdt_fd,dRdt_quotient,h2c_norm,z_delta.
void write_trace_csv(const FrontTrace& trace, const std::filesystem::path& path, int precision);

/// Barrier pair around u0: low = min(u0, T_{-R} u_bar), high = max(u0, T_R u_bar).
std::pair<Field, Field> sandwich_pair(const Field& u0, const Field& u_bar, double R);

/// Sup over z of |u_bar(z) - 1/(1 + e^{(z - s)/sqrt 2})| minimized over the shift s.
double cubic_profile_error(const Field& u_bar);

/// Left-plateau shortfall min_j (u0(j, z_min) - v_j) over free rows.
double plateau_shortfall(const Field& u0, const CrossSectionField& v);

struct ConvergeOutcome {
    WaveSolution wave;
    FrontTrace trace;
    DecayFit decay;
    RTailFit R_tail;
    LogLinearFit h2_fit;
    EnvelopeFit envelope;
    DissipationReport dissipation;
    double worst_ortho_ratio = 0.0;  ///< max ortho_residual / ortho_tolerance
    double max_clip = 0.0;
};

/// Moving-frame run of u0 against the wave with front tracking and fits.
ConvergeOutcome converge_run(const ReactionModel& model, const WaveSolution& wave, const Field& u0, double dt,
                             double horizon, double delta = 0.05);

}  // namespace twave
