#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twave/cross_section.hpp"
#include "twave/grid.hpp"
#include "twave/reaction.hpp"
#include "twave/weighted.hpp"

namespace twave {

/// The freezing phase drove the frame speed to zero or below.
class SpeedNotPositive : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Selected speed and wave profile, normalized so that the sup over the
/// cross-section at z = 0 is half the global sup.
struct WaveSolution {
    double c_dag = 0.0;
    Field u_bar;
    double residual = 0.0;             ///< sup |Delta u + c u_z + f(u, y)| over free nodes
    double normalization_shift = 0.0;  ///< translation applied after the Newton phase
    CrossSectionField v_limit;         ///< left plateau (column z_min)
    bool monotone = false;             ///< every row non-increasing in z
    double worst_increase = 0.0;       ///< largest forward difference along z (positive means a violation)
    double freeze_time = 0.0;          ///< time spent in the freezing phase
    int newton_iterations = 0;
};

struct WaveOptions {
    double dt = 0.0;                 ///< freezing-phase step; 0 picks min(0.25, dt_max)
    double measure_interval = 1.0;   ///< time between speed updates
    double kappa = 0.5;              ///< speed-update gain, halved on oscillation
    double freeze_tolerance = 1e-4;  ///< |front velocity| that ends the freezing phase
    double max_freeze_time = 400.0;
    double newton_tolerance = 1e-10;
    int max_newton_iterations = 40;
};

/// Two-phase computation: evolve in a frame whose speed follows the front
/// until the front freezes, then Newton on the wave equation plus a phase
/// condition with the speed as an extra unknown.
WaveSolution solve_wave(const ReactionModel& model, const GridPtr& grid, const Field& seed, double c_seed,
                        const WaveOptions& options = {});

/// sup over the cross-section of every column.
std::vector<double> column_sup(const Field& u);

/// Position of the half-level crossing of sup_y u(., z) (linear interpolation).
double front_position(const Field& u);

/// Front-like seed p(y) (1 - tanh((z - offset) / width)) / 2.
Field front_seed(const GridPtr& grid, const CrossSectionField& plateau, double offset = 0.0, double width = 2.0);

/// sup |Delta u + c u_z + f(u, y)| over free nodes.
double wave_residual(const ReactionModel& model, const Field& u, double c);

/// Discrete z-derivative of the profile.
Field wave_derivative(const WaveSolution& ws);

struct GapResult {
    double lambda0 = 0.0;            ///< eigenvalue of the linearization closest to 0
    double K = 0.0;                  ///< smallest eigenvalue on the weighted complement of u_bar_z
    double lambda1 = 0.0;            ///< second unconstrained eigenvalue
    double residual_lambda0 = 0.0;
    double residual_K = 0.0;
    double alignment = 0.0;          ///< weighted cosine between the lambda0 eigenvector and u_bar_z
    double constraint_residual = 0.0;///< |<w, u_bar_z>| / (|w| |u_bar_z|) for the K eigenvector
    double zero_mode_residual = 0.0; ///< |J u_bar_z| / |u_bar_z| in the weighted norm
    double scale = 0.0;              ///< max |f_u|, the scale of the operator's zeroth-order part
    int iterations = 0;
    Field eigenvector0;
    Field eigenvectorK;
};

/// Spectrum of H[w] = int e^{c z} (|grad w|^2 - f_u(u_bar, y) w^2) in the
/// e^{c z}-weighted L2 geometry, computed on the symmetrized operator.
GapResult spectral_gap(const WaveSolution& ws, const ReactionModel& model, double tolerance = 1e-11,
                       int max_iterations = 2000);

struct SecondaryResult {
    bool applicable = false;
    std::string note;
    CrossSectionField v;  ///< lower plateau
    CrossSectionField w;  ///< maximal equilibrium, the upper plateau
    double c_dag_v = 0.0;
    std::optional<WaveSolution> h_bar;
};

/// Speed of the front by which the maximal equilibrium invades v, computed
/// for the shifted unknown h = u - v.
SecondaryResult solve_secondary_speed(const ReactionModel& model, const GridPtr& grid, const CriticalPoint& v,
                                      double c_seed, const WaveOptions& options = {});

struct TranslationReport {
    std::vector<double> R;
    std::vector<double> distance;  ///< |T_R u_bar - u_bar| in L2_c
    double C1 = 0.0;               ///< min distance / |R| over 0 < |R| <= 1
    double C2 = 0.0;               ///< max distance / |R| over 0 < |R| <= 1
    double derivative_norm = 0.0;  ///< |u_bar_z| in L2_c
    double small_R_ratio = 0.0;    ///< distance / |R| at the smallest sampled |R|
    bool monotone = true;          ///< distance non-decreasing in |R| on each side
};

TranslationReport translation_bounds(const WaveSolution& ws, double R_max = 2.0, int samples = 41);

void save_wave(const WaveSolution& ws, std::ostream& os);
WaveSolution load_wave(std::istream& is);

}  // namespace twave
