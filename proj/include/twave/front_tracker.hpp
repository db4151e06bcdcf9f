#pragma once

#include <limits>
#include <vector>

#include "twave/evolution.hpp"
#include "twave/wave_solver.hpp"

namespace twave {

/// Optimal translation of the wave onto u and the mismatch it leaves.
struct FrontState {
    double R = 0.0;
    long double R_precise = 0.0L;  ///< R as located; the residuals refer to this value
    double m = 0.0;               ///< |u - T_R u_bar|^2 in L2_c
    double h_p = 0.0;             ///< h'(u, R) at the returned R
    double h_pp = 0.0;            ///< h''(u, R), positive inside the convexity regime
    double ortho_residual = 0.0;  ///< |<u - T_R u_bar, T_R u_bar_z>|
    double ortho_tolerance = 0.0; ///< 1e-8 sqrt(m) |u_bar_z|
    int iterations = 0;
};

struct HDerivatives {
    double h_p = 0.0;
    double h_pp = 0.0;      ///< exact R-derivative of h' for the interpolated profile
    double h_pp_ibp = 0.0;  ///< c h' + int e^{cz} u_z T_R u_bar_z, with centered u_z
};

/// Evaluates h(u, R) = 1/2 |u - T_R u_bar|^2_{L2_c} and its R-derivatives.
/// The translated profile is the monotone cubic interpolant of u_bar,
/// evaluated and summed in extended precision.
class FrontLocator {
public:
    explicit FrontLocator(const WaveSolution& ws);

    double h_value(const Field& u, double R) const;
    HDerivatives h_derivatives(const Field& u, double R) const;
    FrontState locate(const Field& u, long double R_seed) const;

    /// sup over columns right-to-left of the first z whose column mismatch exceeds delta;
    /// -infinity when none does.
    double z_delta(const Field& u, double R, double delta = 0.05) const;

    double derivative_norm() const { return uz_norm_; }
    double speed() const { return c_; }
    const WaveSolution& wave() const { return ws_; }

private:
    struct Sums {
        long double m = 0, hp = 0, hpp = 0;
    };
    Sums sums(const Field& u, long double R) const;

    WaveSolution ws_;
    double c_;
    std::vector<double> w_;
    std::vector<std::vector<double>> slopes_;
    double uz_norm_ = 0.0;
};

double h_value(const Field& u, const WaveSolution& ws, double R);
HDerivatives h_derivatives(const Field& u, const WaveSolution& ws, double R);
FrontState locate_front(const Field& u, const WaveSolution& ws, double R_seed);
double z_delta(const Field& u, const WaveSolution& ws, double R, double delta = 0.05);

inline constexpr double kNoMismatch = -std::numeric_limits<double>::infinity();

struct TraceSample {
    double t = 0.0;
    double R = 0.0;
    double m = 0.0;
    double phi = 0.0;
    double dRdt_fd = 0.0;        ///< (R_n - R_{n-1}) / dt
    double dRdt_quotient = 0.0;  ///< -<u_t, T_R u_bar_z> / h''
    double h2c_norm = 0.0;       ///< H2_c norm of u - T_R u_bar
    double z_delta = kNoMismatch;
    double h_pp = 0.0;
    double ortho_residual = 0.0;
    double ortho_tolerance = 0.0;
};

struct LogLinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double quality = 0.0;  ///< coefficient of determination
    double t_lo = 0.0, t_hi = 0.0;
    int samples = 0;
};

/// Least squares of log(y) against t.
LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y);

struct DecayFit {
    double sigma = 0.0;  ///< -slope / 2 of log m
    double quality = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    int samples = 0;
};

struct FrontTrace {
    std::vector<TraceSample> samples;
    double sigma_fit = 0.0;
    double R_infinity = 0.0;
    double fit_t_lo = 0.0, fit_t_hi = 0.0;
};

/// Window: from the first sample with m < 0.1 m(0) up to the last sample with
/// m > 1e3 eps scale, where scale is |u_bar|^2_{L2_c}. Needs 20 samples.
DecayFit fit_decay(const FrontTrace& trace, double scale);

struct RTailFit {
    double rate = 0.0;        ///< decay rate of |R(t) - R_inf|
    double quality = 0.0;
    double R_infinity = 0.0;  ///< R + (dR/dt) / lambda at the end of the window
    double derivative_rate = 0.0;  ///< decay rate lambda of |dR/dt|
    int samples = 0;
};

/// Decay of |R(t) - R_inf| over [t_lo, t_hi]. R_inf is extrapolated from the
/// geometric tail: with R - R_inf ~ A e^{-lambda t}, R_inf = R + (dR/dt) / lambda,
/// lambda taken from a log-linear fit of |dR/dt|.
RTailFit fit_R_tail(const FrontTrace& trace, double t_lo, double t_hi);

/// Line b0 - b t lying above every finite z_delta sample (least-squares slope,
/// intercept raised to the envelope).
struct EnvelopeFit {
    double intercept = 0.0;
    double b = 0.0;  ///< retreat rate; the envelope is intercept - b t
    int finite_samples = 0;
};
EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& z);

/// Steps an evolution and tracks the front after every accepted step.
class FrontTracker {
public:
    FrontTracker(const WaveSolution& ws, const ReactionModel& model, double delta = 0.05);

    /// Locate the front in the initial state; must be called first.
    void start(const EvolutionState& state, double R_seed);
    /// Record the state that followed the previous one.
    void observe(const EvolutionState& state);

    const FrontTrace& trace() const { return trace_; }
    FrontTrace& trace() { return trace_; }
    const FrontLocator& locator() const { return loc_; }

private:
    TraceSample sample(const EvolutionState& s, const FrontState& fs) const;

    FrontLocator loc_;
    ReactionModel model_;
    WeightedMeasure m_;
    double delta_;
    EvolutionState prev_;
    long double R_prev_ = 0.0L;
    bool started_ = false;
    FrontTrace trace_;
};

}  // namespace twave
