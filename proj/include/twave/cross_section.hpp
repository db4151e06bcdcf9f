#pragma once

#include <string>
#include <vector>

#include "twave/grid.hpp"
#include "twave/reaction.hpp"

namespace twave {

/// Principal eigenpair of -Delta_y - f_u(v(y), y) on the cross-section.
struct EigenResult {
    double value = 0.0;
    CrossSectionField eigenfunction;  ///< positive, unit L2(Omega) norm
    int iterations = 0;
    double residual = 0.0;
    double rayleigh_quotient = 0.0;
};

struct CriticalPoint {
    CrossSectionField v;
    double energy = 0.0;
    double gradient_norm = 0.0;  ///< sup |Delta_y v + f(v, y)| over free nodes
    double hessian_floor = 0.0;  ///< principal eigenvalue of the linearization at v
    bool trivial = false;        ///< nontrivial seed ended at v = 0
    std::string status;
};

/// E[v] = int_Omega (1/2 |v_y|^2 + V(v, y)) dy by trapezoid quadrature.
double energy_E(const CrossSectionField& v, const ReactionModel& model);

/// Smallest eigenvalue of -Delta_y - f_u(linearize_at, y) by shifted inverse iteration.
EigenResult eigen_nu(const ReactionModel& model, const GridPtr& grid, const CrossSectionField& linearize_at,
                     double tolerance = 1e-9, int max_iterations = 10000);

/// Semi-implicit gradient flow of E; returns E after every step (the seed's E first).
std::vector<double> cross_section_flow(const ReactionModel& model, CrossSectionField& v, double dt, int steps);

struct CriticalPointOptions {
    double flow_tolerance = 1e-7;
    int max_flow_steps = 200000;
    double newton_tolerance = 1e-10;
    int max_newton_iterations = 50;
};

/// Local minimizer of E reached from `seed`: gradient flow into the basin,
/// then damped Newton on Delta_y v + f(v, y) = 0.
CriticalPoint find_critical_point(const ReactionModel& model, const GridPtr& grid, const CrossSectionField& seed,
                                  const CriticalPointOptions& options = {});

struct H3Report {
    double nu0 = 0.0;
    double discriminant = 0.0;  ///< c^2 + 4 nu0
    bool discriminant_positive = false;
    double best_phi = 0.0;      ///< smallest Phi_c found along the flow
    bool phi_nonpositive = false;
    double initial_phi = 0.0;
};

/// Check c^2 + 4 nu0 > 0 and search for Phi_c[u] <= 0 by evolving the
/// weighted gradient flow from a front-like seed for a fixed time budget.
H3Report check_H3(const ReactionModel& model, const GridPtr& grid, double c_trial, double budget = 40.0,
                  double dt = 0.2);

}  // namespace twave
