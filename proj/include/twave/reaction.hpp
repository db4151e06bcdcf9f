#pragma once

#include <functional>
#include <string>
#include <vector>

#include "twave/grid.hpp"

namespace twave {

using ScalarFn = std::function<double(double u, double y)>;

/// Nonlinearity f(u, y) with its u-derivative and the cutoff potential
/// V(u, y) = -int_0^u f(s, y) chi_[0,1](s) ds.
struct ReactionModel {
    std::string label;
    ScalarFn f;
    ScalarFn f_u;
    ScalarFn V_exact;  ///< closed-form V; empty means adaptive quadrature
    double holder_exponent = 1.0;
    /// Largest value the unknown reaches at y (the invariant box is [0, u_top(y)]);
    /// empty means 1.
    std::function<double(double y)> u_top;
};

/// f(u, y) = scale * prod_k (u - r_k(y)); V is integrated exactly.
ReactionModel polynomial_model(std::string label, double scale, std::vector<std::function<double(double)>> roots);

/// f(u) = u (1 - u) (u - a).
ReactionModel cubic_bistable(double a);

/// f(u, y) = u (1 - u) (u - a(y)), a(y) = a0 + a1 cos(pi (y - y_min) / (y_max - y_min)).
ReactionModel cubic_heterogeneous(double a0, double a1, double y_min, double y_max);

/// Quintic with stable zeros 0, b, 1 and unstable zeros a1 in (0, b), a2 in (b, 1):
/// f(u) = -k u (u - a1) (u - b) (u - a2) (u - 1).
ReactionModel tristable(double a1, double b, double a2, double k = 1.0);

/// f(u) = u. Violates the f(1) <= 0 requirement; used for validation paths.
ReactionModel linear_growth();

/// Model for the shifted unknown h = u - v: g(h, y) = f(v(y) + h, y) - f(v(y), y).
/// v is interpolated linearly between cross-section nodes.
ReactionModel shifted_model(const ReactionModel& base, const CrossSectionField& v);

Field eval_f(const ReactionModel& model, const Field& u);
double eval_V(const ReactionModel& model, double u, double y);

/// Largest |f_u| over the invariant box [0, u_top(y)] (default [0, 1]) and the grid's cross-section nodes.
double max_abs_fu(const ReactionModel& model, const CylinderGrid& grid);

struct HypothesisReport {
    bool h1 = false;                ///< f(0,y) = 0 and f(1,y) <= 0 at every sampled y
    double worst_f0 = 0.0;          ///< max |f(0, y)|
    double worst_f1 = 0.0;          ///< max f(1, y)
    double holder_quotient_f = 0.0; ///< sampled Holder quotient of f (heuristic)
    double holder_quotient_fu = 0.0;
    std::vector<double> integral;   ///< int_0^1 f(u, y) du per sampled y
    bool integral_positive = false;
    bool nondegenerate = false;     ///< f_u(0,y) < 0 and f_u(1,y) < 0
};

HypothesisReport check_hypotheses(const ReactionModel& model, const CylinderGrid& grid);

}  // namespace twave
