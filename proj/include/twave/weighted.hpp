#pragma once

#include <vector>

#include "twave/grid.hpp"

namespace twave {

/// Exponential weight e^{c (z - z_ref)}. Norms taken with different z_ref
/// differ by the exact factor e^{c (z_ref1 - z_ref2) / 2}.
struct WeightedMeasure {
    double c = 1.0;
    double z_ref = 0.0;
};

/// Thrown when c |z - z_ref| would leave the safe range of double precision.
class WeightOverflow : public NumericalError {
public:
    using NumericalError::NumericalError;
};

inline constexpr double kMaxWeightExponent = 600.0;

/// Quadrature weight of every node: the trapezoid weight in y times the
/// axial weight. The axial weight is dz e^{c(z - z_ref)} in the interior and
/// half of that at closed ends; a plateau end additionally carries the tail
/// integral of the flat continuation, dz e^{c(z0 - z_ref)} / (1 - e^{-c dz}).
std::vector<double> node_weights(const CylinderGrid& grid, const WeightedMeasure& m);

/// Axial part of node_weights (length n_z).
std::vector<double> axial_weights(const CylinderGrid& grid, const WeightedMeasure& m);

double weighted_inner(const Field& u, const Field& v, const WeightedMeasure& m);
double weighted_norm_l2(const Field& u, const WeightedMeasure& m);

/// Weighted Dirichlet integral of u: sum over axial edges of
/// dz e^{c(z_{i+1/2}-z_ref)} ((u_{i+1}-u_i)/dz)^2 plus the cross-section edges.
double weighted_gradient_sq(const Field& u, const WeightedMeasure& m);

double weighted_norm_h1(const Field& u, const WeightedMeasure& m);

/// H^2 norm assembled from second differences at interior nodes.
double weighted_norm_h2(const Field& u, const WeightedMeasure& m);

/// Monotone piecewise-cubic Hermite interpolant of samples on a uniform grid.
///
/// Node slopes start from the fourth-order centered difference and are
/// limited (Hyman filter) so monotone data give a monotone interpolant.
/// Outside the sample range the interpolant is constant.
class MonotoneCubic {
public:
    MonotoneCubic(std::span<const double> values, double x0, double h, bool flat_left);

    double operator()(double x) const;
    double derivative(double x) const;
    const std::vector<double>& slopes() const { return slopes_; }

private:
    std::vector<double> values_;
    std::vector<double> slopes_;
    double x0_, h_;
};

/// Axial translation T_R u(., z) = u(., z - R).
Field translate(const Field& u, double R);

/// z-derivative of the interpolant of u, evaluated at z - R.
Field translate_derivative(const Field& u, double R);

/// Node slopes of the interpolant of u along z (a fourth-order du/dz).
Field axial_derivative(const Field& u);

}  // namespace twave
