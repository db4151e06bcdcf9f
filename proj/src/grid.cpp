#include "twave/grid.hpp"

#include <algorithm>
#include <cmath>

namespace twave {

BoundaryKind parse_boundary(std::string_view tag) {
    if (tag == "dirichlet") return BoundaryKind::Dirichlet;
    if (tag == "neumann") return BoundaryKind::Neumann;
    if (tag == "plateau") return BoundaryKind::Plateau;
    throw ConfigError("unknown boundary tag '" + std::string(tag) + "'");
}

std::string_view to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::Dirichlet: return "dirichlet";
        case BoundaryKind::Neumann: return "neumann";
        case BoundaryKind::Plateau: return "plateau";
    }
    return "?";
}

CylinderGrid::CylinderGrid(const GridConfig& config) : config_(config) {
    if (config.n_z < 16) throw ConfigError("axial resolution too small (n_z < 16)");
    if (config.n_y < 1) throw ConfigError("cross-section resolution must be >= 1");
    if (!(config.z_max > config.z_min)) throw ConfigError("axial window length must be positive");
    if (config.n_y > 1 && !(config.y_max > config.y_min))
        throw ConfigError("cross-section length must be positive");
    auto cross_ok = [](BoundaryKind k) { return k == BoundaryKind::Dirichlet || k == BoundaryKind::Neumann; };
    if (!cross_ok(config.bc_left) || !cross_ok(config.bc_right))
        throw ConfigError("cross-section ends accept dirichlet or neumann only");
    if (config.n_y == 1 && (config.bc_left != BoundaryKind::Neumann || config.bc_right != BoundaryKind::Neumann))
        throw ConfigError("pure-1D mode (n_y = 1) requires neumann cross-section tags");
    if (config.bc_z_lo == BoundaryKind::Dirichlet)
        throw ConfigError("axial low end accepts neumann or plateau only");
    if (config.bc_z_hi == BoundaryKind::Plateau)
        throw ConfigError("axial high end accepts dirichlet or neumann only");
    dz_ = (config.z_max - config.z_min) / (config.n_z - 1);
    dy_ = config.n_y > 1 ? (config.y_max - config.y_min) / (config.n_y - 1) : 1.0;
}

bool CylinderGrid::y_fixed(int j) const {
    if (one_d()) return false;
    return (j == 0 && config_.bc_left == BoundaryKind::Dirichlet) ||
           (j == config_.n_y - 1 && config_.bc_right == BoundaryKind::Dirichlet);
}

bool CylinderGrid::fixed(int j, int i) const {
    return y_fixed(j) || (i == config_.n_z - 1 && config_.bc_z_hi == BoundaryKind::Dirichlet);
}

double CylinderGrid::y_weight(int j) const {
    if (one_d()) return 1.0;
    return (j == 0 || j == config_.n_y - 1) ? 0.5 * dy_ : dy_;
}

CylinderGrid CylinderGrid::shifted(double offset) const {
    GridConfig c = config_;
    c.z_min += offset;
    c.z_max += offset;
    return CylinderGrid(c);
}

bool CylinderGrid::operator==(const CylinderGrid& o) const {
    const auto& a = config_;
    const auto& b = o.config_;
    return a.n_y == b.n_y && a.n_z == b.n_z && a.y_min == b.y_min && a.y_max == b.y_max &&
           a.z_min == b.z_min && a.z_max == b.z_max && a.bc_left == b.bc_left &&
           a.bc_right == b.bc_right && a.bc_z_lo == b.bc_z_lo && a.bc_z_hi == b.bc_z_hi;
}

GridPtr build_grid(const GridConfig& config) { return std::make_shared<const CylinderGrid>(config); }

Field::Field(GridPtr grid, double fill) : grid_(std::move(grid)), values_(grid_->size(), fill) {}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw ConfigError("field size does not match grid");
}

std::span<const double> Field::row(int j) const {
    return std::span<const double>(values_).subspan(grid_->index(j, 0), grid_->n_z());
}

std::span<double> Field::row(int j) {
    return std::span<double>(values_).subspan(grid_->index(j, 0), grid_->n_z());
}

bool Field::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

static void check_same(const Field& a, const Field& b) {
    if (a.size() != b.size() || !(a.grid() == b.grid())) throw ConfigError("field grids do not match");
}

Field& Field::operator+=(const Field& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    check_same(*this, o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

CrossSectionField::CrossSectionField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->n_y(), fill) {
    for (int j = 0; j < grid_->n_y(); ++j)
        if (grid_->y_fixed(j)) values_[j] = 0.0;
}

CrossSectionField::CrossSectionField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_->n_y())
        throw ConfigError("cross-section field size does not match grid");
}

CrossSectionField column(const Field& u, int i) {
    std::vector<double> v(u.grid().n_y());
    for (int j = 0; j < u.grid().n_y(); ++j) v[j] = u(j, i);
    return CrossSectionField(u.grid_ptr(), std::move(v));
}

Field apply_boundary(const Field& u) {
    Field out = u;
    const auto& g = u.grid();
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i)
            if (g.fixed(j, i)) out(j, i) = 0.0;
    return out;
}

double neumann_ghost(const Field& u, int side, int along) {
    const auto& g = u.grid();
    switch (side) {
        case 0: return g.one_d() ? u(0, along) : u(1, along);
        case 1: return g.one_d() ? u(0, along) : u(g.n_y() - 2, along);
        case 2: return u(along, 1);
        case 3: return u(along, g.n_z() - 2);
        default: throw ConfigError("boundary side must be 0..3");
    }
}

double boundary_normal_difference(const Field& u, int side, int along) {
    const auto& g = u.grid();
    const double ghost = neumann_ghost(u, side, along);
    switch (side) {
        case 0: return g.one_d() ? 0.0 : (u(1, along) - ghost) / (2.0 * g.dy());
        case 1: return g.one_d() ? 0.0 : (ghost - u(g.n_y() - 2, along)) / (2.0 * g.dy());
        case 2: return (u(along, 1) - ghost) / (2.0 * g.dz());
        default: return (ghost - u(along, g.n_z() - 2)) / (2.0 * g.dz());
    }
}

Field shift_cells(const Field& u, int cells) {
    Field out(u.grid_ptr());
    const int nz = u.grid().n_z();
    for (int j = 0; j < u.grid().n_y(); ++j)
        for (int i = 0; i < nz; ++i) out(j, i) = u(j, std::clamp(i - cells, 0, nz - 1));
    return apply_boundary(out);
}

LinearOperator::LinearOperator(GridPtr grid, double c) : grid_(std::move(grid)), c_(c) {
    if (grid_->bc_z_lo() == BoundaryKind::Plateau && c < 0.0)
        throw ConfigError("plateau closure requires a non-negative frame speed");
}

LinearOperator::Row LinearOperator::row(int j, int i) const {
    Row r;
    const auto& g = *grid_;
    if (g.fixed(j, i)) return r;
    const double h2 = g.dz() * g.dz();
    const double a = 0.5 * c_ * g.dz();
    const double ep = std::exp(a), em = std::exp(-a);
    const int nz = g.n_z();
    if (i == 0) {
        r.z_plus = g.bc_z_lo() == BoundaryKind::Plateau ? 2.0 * std::sinh(a) / h2 : 2.0 * ep / h2;
    } else if (i == nz - 1) {
        r.z_minus = 2.0 * em / h2;
    } else {
        r.z_plus = ep / h2;
        r.z_minus = em / h2;
    }
    if (!g.one_d()) {
        const double k2 = 1.0 / (g.dy() * g.dy());
        const int ny = g.n_y();
        if (j == 0) {
            r.y_plus = 2.0 * k2;
        } else if (j == ny - 1) {
            r.y_minus = 2.0 * k2;
        } else {
            r.y_plus = k2;
            r.y_minus = k2;
        }
    }
    r.center = -(r.z_plus + r.z_minus + r.y_plus + r.y_minus);
    return r;
}

LinearOperator::Row LinearOperator::row_dc(int j, int i) const {
    Row r;
    const auto& g = *grid_;
    if (g.fixed(j, i)) return r;
    const double dz = g.dz();
    const double h2 = dz * dz;
    const double a = 0.5 * c_ * dz;
    const double ep = std::exp(a), em = std::exp(-a);
    const int nz = g.n_z();
    if (i == 0) {
        r.z_plus = g.bc_z_lo() == BoundaryKind::Plateau ? std::cosh(a) * dz / h2 : ep * dz / h2;
    } else if (i == nz - 1) {
        r.z_minus = -em * dz / h2;
    } else {
        r.z_plus = 0.5 * dz * ep / h2;
        r.z_minus = -0.5 * dz * em / h2;
    }
    r.center = -(r.z_plus + r.z_minus);
    return r;
}

namespace {

Field apply_rows(const Field& u, const CylinderGrid& g, auto&& row_of) {
    Field out(u.grid_ptr());
    const int ny = g.n_y(), nz = g.n_z();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nz; ++i) {
            const LinearOperator::Row r = row_of(j, i);
            double s = r.center * u(j, i);
            if (i > 0) s += r.z_minus * u(j, i - 1);
            if (i < nz - 1) s += r.z_plus * u(j, i + 1);
            if (j > 0) s += r.y_minus * u(j - 1, i);
            if (j < ny - 1) s += r.y_plus * u(j + 1, i);
            out(j, i) = s;
        }
    }
    return out;
}

}  // namespace

Field LinearOperator::apply(const Field& u) const {
    return apply_rows(u, *grid_, [this](int j, int i) { return row(j, i); });
}

Field LinearOperator::apply_dc(const Field& u) const {
    return apply_rows(u, *grid_, [this](int j, int i) { return row_dc(j, i); });
}

Field laplacian_advection(const Field& u, double c) { return LinearOperator(u.grid_ptr(), c).apply(u); }

}  // namespace twave
