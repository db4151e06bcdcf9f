#include <cfloat>
#include <cmath>
#include <random>

#include "doctest.h"
#include "twave/grid.hpp"

using namespace twave;

namespace {

GridPtr strip(int n_y, BoundaryKind side, int n_z = 101) {
    GridConfig c;
    c.n_y = n_y;
    c.n_z = n_z;
    c.y_min = 0.0;
    c.y_max = 1.0;
    c.bc_left = c.bc_right = side;
    c.bc_z_lo = BoundaryKind::Neumann;
    c.bc_z_hi = BoundaryKind::Neumann;
    return build_grid(c);
}

Field random_field(const GridPtr& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Field u(g);
    for (auto& x : u.data()) x = d(rng);
    return u;
}

}  // namespace

TEST_CASE("build_grid derives the spacings") {
    GridConfig c;
    c.n_z = 401;
    c.z_min = -20.0;
    c.z_max = 20.0;
    CHECK(build_grid(c)->dz() == doctest::Approx(0.1).epsilon(1e-14));

    GridConfig d;
    d.n_y = 33;
    d.y_min = 0.0;
    d.y_max = 1.0;
    CHECK(build_grid(d)->dy() == doctest::Approx(1.0 / 32.0).epsilon(1e-14));
}

TEST_CASE("build_grid rejects bad input") {
    GridConfig c;
    c.n_z = 8;
    CHECK_THROWS_WITH_AS(build_grid(c), doctest::Contains("axial resolution too small"), ConfigError);
    GridConfig w;
    w.z_max = w.z_min;
    CHECK_THROWS_AS(build_grid(w), ConfigError);
    CHECK_THROWS_AS(parse_boundary("periodic"), ConfigError);
}

TEST_CASE("build_grid is deterministic") {
    GridConfig c;
    c.n_y = 5;
    CHECK(*build_grid(c) == *build_grid(c));
}

TEST_CASE("apply_boundary on constant fields") {
    SUBCASE("Dirichlet zeroes the end rows") {
        const auto g = strip(9, BoundaryKind::Dirichlet);
        const Field u = apply_boundary(Field(g, 1.0));
        for (int i = 0; i < g->n_z(); ++i) {
            CHECK(u(0, i) == 0.0);
            CHECK(u(8, i) == 0.0);
            CHECK(u(4, i) == 1.0);
        }
    }
    SUBCASE("Neumann leaves them alone") {
        const auto g = strip(9, BoundaryKind::Neumann);
        const Field one(g, 1.0);
        CHECK(apply_boundary(one).data() == one.data());
    }
}

TEST_CASE("Neumann ghost reflection of a linear profile has zero normal difference") {
    const auto g = strip(17, BoundaryKind::Neumann);
    Field u(g);
    for (int j = 0; j < g->n_y(); ++j)
        for (int i = 0; i < g->n_z(); ++i) u(j, i) = 3.0 * g->y(j) - 1.0;
    for (int i = 0; i < g->n_z(); i += 10) {
        CHECK(std::abs(boundary_normal_difference(u, 0, i)) < 1e-14);
        CHECK(std::abs(boundary_normal_difference(u, 1, i)) < 1e-14);
    }
}

TEST_CASE("apply_boundary is idempotent") {
    for (auto side : {BoundaryKind::Dirichlet, BoundaryKind::Neumann}) {
        const auto g = strip(11, side);
        const Field once = apply_boundary(random_field(g, 3));
        CHECK(apply_boundary(once).data() == once.data());
    }
}

TEST_CASE("laplacian_advection examples") {
    SUBCASE("constants are annihilated") {
        const auto g = strip(9, BoundaryKind::Neumann);
        const Field r = laplacian_advection(Field(g, 1.0), 0.7);
        CHECK(r.max_abs() < 1e-12);
    }
    SUBCASE("u = z gives c at interior nodes, up to the fitted stencil's O(dz^2)") {
        // The fitted stencil maps z to 2 sinh(c dz / 2) / dz = c (1 + (c dz)^2 / 24 + ...).
        for (int n_z : {401, 4001}) {
            const auto g = strip(9, BoundaryKind::Neumann, n_z);
            Field u(g);
            for (int j = 0; j < g->n_y(); ++j)
                for (int i = 0; i < g->n_z(); ++i) u(j, i) = g->z(i);
            const Field r = laplacian_advection(u, 2.0);
            const double dz = g->dz(), exact = 2.0 * std::sinh(dz) / dz;
            const double zmax = std::max(std::abs(g->z_min()), std::abs(g->z_max()));
            double err = 0.0;
            for (int j = 0; j < g->n_y(); ++j)
                for (int i = 1; i + 1 < g->n_z(); ++i) {
                    // Cancellation: three rounded terms of size max|z| / dz^2 sum to O(1).
                    CHECK(std::abs(r(j, i) - exact) <= 16.0 * DBL_EPSILON * zmax / (dz * dz));
                    err = std::max(err, std::abs(r(j, i) - 2.0));
                }
            CHECK(err <= 1.01 * 8.0 * dz * dz / 24.0);
        }
    }
    SUBCASE("sin(pi y) with Dirichlet ends, second order") {
        double prev = 0.0;
        for (int n : {17, 33, 65}) {
            const auto g = strip(n, BoundaryKind::Dirichlet, 20);
            Field u(g);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < g->n_z(); ++i) u(j, i) = std::sin(M_PI * g->y(j));
            const Field r = laplacian_advection(u, 0.0);
            double err = 0.0;
            for (int j = 1; j + 1 < n; ++j) err = std::max(err, std::abs(r(j, 5) + M_PI * M_PI * u(j, 5)));
            CHECK(err < 2.0 * M_PI * M_PI * M_PI * M_PI / 12.0 * g->dy() * g->dy());
            if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
            prev = err;
        }
    }
}

TEST_CASE("Neumann discrete Laplacian has zero row sums") {
    const auto g = strip(7, BoundaryKind::Neumann, 31);
    const LinearOperator op(g, 0.0);
    for (int j = 0; j < g->n_y(); ++j)
        for (int i = 1; i + 1 < g->n_z(); ++i) {
            const auto r = op.row(j, i);
            CHECK(std::abs(r.center + r.z_minus + r.z_plus + r.y_minus + r.y_plus) < 1e-10);
        }
}

TEST_CASE("laplacian_advection is linear") {
    const auto g = strip(9, BoundaryKind::Dirichlet);
    const Field u = apply_boundary(random_field(g, 1)), v = apply_boundary(random_field(g, 2));
    const double a = 0.37, b = -1.9;
    const Field lhs = laplacian_advection(a * u + b * v, 0.4);
    const Field rhs = a * laplacian_advection(u, 0.4) + b * laplacian_advection(v, 0.4);
    CHECK((lhs - rhs).max_abs() < 1e-9);
}

TEST_CASE("shift_cells repeats the edge columns") {
    const auto g = strip(1, BoundaryKind::Neumann, 20);
    Field u(g);
    for (int i = 0; i < 20; ++i) u(0, i) = i;
    const Field r = shift_cells(u, 3);
    CHECK(r(0, 0) == 0.0);
    CHECK(r(0, 3) == 0.0);
    CHECK(r(0, 4) == 1.0);
    const Field l = shift_cells(u, -2);
    CHECK(l(0, 0) == 2.0);
    CHECK(l(0, 19) == 19.0);
}
