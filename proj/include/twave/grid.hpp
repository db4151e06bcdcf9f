#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace twave {

/// Raised for malformed inputs (bad grid parameters, unknown tags, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure fails (non-convergence, overflow, bound violation).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Boundary treatment of one end of the grid.
///
/// Cross-section ends accept Dirichlet or Neumann. The axial low end accepts
/// Neumann (closed window, trapezoid end weight) or Plateau: a homogeneous
/// Neumann end whose data is continued as a flat plateau to z = -inf, so the
/// weighted quadrature carries the analytic tail of the plateau.
/// The axial high end accepts Dirichlet (u = 0) or Neumann.
enum class BoundaryKind { Dirichlet, Neumann, Plateau };

BoundaryKind parse_boundary(std::string_view tag);
std::string_view to_string(BoundaryKind kind);

struct GridConfig {
    int n_y = 1;
    int n_z = 401;
    double y_min = 0.0;
    double y_max = 1.0;
    double z_min = -20.0;
    double z_max = 20.0;
    BoundaryKind bc_left = BoundaryKind::Neumann;   // y = y_min
    BoundaryKind bc_right = BoundaryKind::Neumann;  // y = y_max
    BoundaryKind bc_z_lo = BoundaryKind::Plateau;
    BoundaryKind bc_z_hi = BoundaryKind::Dirichlet;
};

/// Uniform tensor grid on the truncated cylinder Omega x [z_min, z_max].
/// Node (j, i) has coordinates (y_j, z_i); storage is row-major in j.
class CylinderGrid {
public:
    explicit CylinderGrid(const GridConfig& config);

    int n_y() const { return config_.n_y; }
    int n_z() const { return config_.n_z; }
    std::size_t size() const { return static_cast<std::size_t>(config_.n_y) * config_.n_z; }
    bool one_d() const { return config_.n_y == 1; }

    double dy() const { return dy_; }
    double dz() const { return dz_; }
    double y(int j) const { return one_d() ? config_.y_min : config_.y_min + j * dy_; }
    double z(int i) const { return config_.z_min + i * dz_; }
    double y_min() const { return config_.y_min; }
    double y_max() const { return config_.y_max; }
    double z_min() const { return config_.z_min; }
    double z_max() const { return config_.z_max; }

    BoundaryKind bc_left() const { return config_.bc_left; }
    BoundaryKind bc_right() const { return config_.bc_right; }
    BoundaryKind bc_z_lo() const { return config_.bc_z_lo; }
    BoundaryKind bc_z_hi() const { return config_.bc_z_hi; }
    const GridConfig& config() const { return config_; }

    std::size_t index(int j, int i) const { return static_cast<std::size_t>(j) * config_.n_z + i; }

    /// Cross-section node held at zero by a Dirichlet tag.
    bool y_fixed(int j) const;
    /// Node held at zero (Dirichlet cross-section end or Dirichlet axial high end).
    bool fixed(int j, int i) const;

    /// Cross-section trapezoid weight of row j (1 in pure-1D mode).
    double y_weight(int j) const;

    /// Same grid with the axial coordinates shifted by `offset`.
    CylinderGrid shifted(double offset) const;

    bool operator==(const CylinderGrid& other) const;

private:
    GridConfig config_;
    double dy_ = 0.0;
    double dz_ = 0.0;
};

using GridPtr = std::shared_ptr<const CylinderGrid>;

GridPtr build_grid(const GridConfig& config);

/// Grid function on a CylinderGrid.
class Field {
public:
    Field() = default;
    explicit Field(GridPtr grid, double fill = 0.0);
    Field(GridPtr grid, std::vector<double> values);

    const CylinderGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    double& operator()(int j, int i) { return values_[grid_->index(j, i)]; }
    double operator()(int j, int i) const { return values_[grid_->index(j, i)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }
    std::size_t size() const { return values_.size(); }

    /// Row j as a contiguous view along z.
    std::span<const double> row(int j) const;
    std::span<double> row(int j);

    bool all_finite() const;
    double max_abs() const;

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(double s);

private:
    GridPtr grid_;
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Function on the cross-section Omega.
class CrossSectionField {
public:
    CrossSectionField() = default;
    explicit CrossSectionField(GridPtr grid, double fill = 0.0);
    CrossSectionField(GridPtr grid, std::vector<double> values);

    const CylinderGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    double& operator[](int j) { return values_[j]; }
    double operator[](int j) const { return values_[j]; }
    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Column i of u as a cross-section field.
CrossSectionField column(const Field& u, int i);

/// Zero the Dirichlet nodes. Neumann nodes are left alone: their ghost value
/// is the mirror image, see neumann_ghost().
Field apply_boundary(const Field& u);

/// Ghost value beyond a Neumann end, by second-order reflection.
/// side: 0 = y_min, 1 = y_max, 2 = z_min, 3 = z_max.
double neumann_ghost(const Field& u, int side, int along);

/// Centered normal difference at a boundary node using the ghost value.
double boundary_normal_difference(const Field& u, int side, int along);

/// Shift the data by an integer number of cells along z: result(i) = u(i - cells).
/// Vacated cells on the left repeat the first column, on the right the last one.
Field shift_cells(const Field& u, int cells);

/// Discrete linear part Delta u + c u_z of the moving-frame equation.
///
/// The axial stencil is the three-point exponentially fitted one,
///   (e^{a}(u_{i+1}-u_i) - e^{-a}(u_i-u_{i-1})) / dz^2,  a = c dz / 2,
/// which is centered, second order, and is exactly the L2-gradient of the
/// e^{cz}-weighted Dirichlet energy (see weighted.hpp). Fixed nodes map to 0.
class LinearOperator {
public:
    LinearOperator(GridPtr grid, double c);

    const CylinderGrid& grid() const { return *grid_; }
    double speed() const { return c_; }

    Field apply(const Field& u) const;
    /// d/dc of apply(u) at fixed u.
    Field apply_dc(const Field& u) const;

    struct Row {
        double center = 0.0;
        double z_minus = 0.0, z_plus = 0.0;
        double y_minus = 0.0, y_plus = 0.0;
    };
    /// Stencil coefficients of node (j, i); all zero for fixed nodes.
    Row row(int j, int i) const;
    Row row_dc(int j, int i) const;

private:
    GridPtr grid_;
    double c_;
};

Field laplacian_advection(const Field& u, double c);

}  // namespace twave
