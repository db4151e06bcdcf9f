#pragma once

#include <memory>
#include <span>
#include <vector>

#include "twave/grid.hpp"
#include "twave/reaction.hpp"
#include "twave/weighted.hpp"

namespace twave {

struct EvolutionState {
    double t = 0.0;
    Field u;
    double frame_speed = 0.0;  ///< 0 is the lab frame
    long window_shift = 0;     ///< cumulative re-windowing, in cells
    double clipped = 0.0;      ///< largest excursion outside [0, 1] removed by the last step
};

/// Largest admissible step of the IMEX scheme: 0.5 / max |f_u|.
double dt_max(const ReactionModel& model, const CylinderGrid& grid);

/// IMEX stepper for u_t = Delta u + c u_z + f(u, y): backward Euler on the
/// linear part (factorized once), forward Euler on f, then clipping to [0, 1].
class Integrator {
public:
    Integrator(ReactionModel model, GridPtr grid, double frame_speed, double dt);

    EvolutionState step(const EvolutionState& state) const;
    /// Advance until t >= t_end (the last step is not shortened).
    EvolutionState advance(EvolutionState state, double t_end) const;

    double dt() const { return dt_; }
    double frame_speed() const { return c_; }
    const ReactionModel& model() const { return model_; }
    const GridPtr& grid() const { return grid_; }

private:
    struct Factor;
    ReactionModel model_;
    GridPtr grid_;
    double c_;
    double dt_;
    std::shared_ptr<const Factor> factor_;
};

/// One step with a freshly factorized operator.
EvolutionState step(const EvolutionState& state, const ReactionModel& model, double dt);

/// Gradient and potential parts of Phi_c, and the total absolute mass of the
/// integrand (the scale against which rounding is judged).
struct EnergyParts {
    double gradient = 0.0;
    double potential = 0.0;
    double total = 0.0;
    double magnitude = 0.0;
};

EnergyParts energy_parts(const Field& u, const ReactionModel& model, const WeightedMeasure& m);

/// Phi_c[u] = int e^{c(z - z_ref)} (1/2 |grad u|^2 + V(u, y)).
double energy_phi(const Field& u, const ReactionModel& model, const WeightedMeasure& m);

struct DissipationReport {
    double phi_drop = 0.0;           ///< Phi(first) - Phi(last)
    double dissipated = 0.0;         ///< sum over steps of |du/dt|^2_W dt
    double relative_residual = 0.0;  ///< |phi_drop - dissipated| / dissipated (0 when both vanish)
    bool monotone = true;            ///< Phi never rose by more than 1e-10 of its magnitude
    double worst_increase = 0.0;     ///< largest relative step increase of Phi
    int first_increase = -1;         ///< step index of the first violation
    std::vector<double> phi;
};

/// Accumulates the energy identity step by step, so long runs need not keep states.
class DissipationMonitor {
public:
    DissipationMonitor(ReactionModel model, WeightedMeasure m);
    void add(const EvolutionState& state);
    const DissipationReport& report() const { return report_; }

private:
    ReactionModel model_;
    WeightedMeasure m_;
    std::vector<double> w_;
    Field prev_;
    double prev_t_ = 0.0;
    int steps_ = 0;
    DissipationReport report_;
};

DissipationReport dissipation_check(std::span<const EvolutionState> trace, const ReactionModel& model,
                                    const WeightedMeasure& m);

struct ComparisonReport {
    bool ordered = true;
    double worst_violation = 0.0;     ///< max over time of max(u_k - u_{k+1})
    double first_violation_time = -1.0;
    int checks = 0;
};

inline constexpr double kOrderTolerance = 1e-10;

/// Evolve an ordered chain u_0 <= u_1 <= ... and check the order after every step.
ComparisonReport comparison_test(const std::vector<Field>& chain, const ReactionModel& model, double frame_speed,
                                 double dt, double horizon);

ComparisonReport comparison_test(const Field& low, const Field& high, const ReactionModel& model, double frame_speed,
                                 double dt, double horizon);

}  // namespace twave
