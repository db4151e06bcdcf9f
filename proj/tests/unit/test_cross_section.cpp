#include <cmath>

#include "doctest.h"
#include "twave/cross_section.hpp"

using namespace twave;

namespace {

GridPtr section(int n_y, BoundaryKind side, double len = 1.0) {
    GridConfig c;
    c.n_y = n_y;
    c.n_z = 16;
    c.y_min = 0.0;
    c.y_max = len;
    c.bc_left = c.bc_right = side;
    return build_grid(c);
}

ReactionModel constant_fu(double mu) {
    ReactionModel m;
    m.label = "linear_mu";
    m.f = [mu](double u, double) { return mu * u; };
    m.f_u = [mu](double, double) { return mu; };
    m.V_exact = [mu](double u, double) { return -0.5 * mu * std::clamp(u, 0.0, 1.0) * std::clamp(u, 0.0, 1.0); };
    return m;
}

}  // namespace

TEST_CASE("energy_E examples") {
    const auto g = section(21, BoundaryKind::Neumann);
    const auto m = cubic_bistable(0.25);
    CHECK(energy_E(CrossSectionField(g, 0.0), m) == 0.0);
    CHECK(energy_E(CrossSectionField(g, 1.0), m) == doctest::Approx(-1.0 / 24.0).epsilon(1e-14));
    // inf E < 0 holds: E[1] < 0 while nu0 = a >= 0.
    CHECK(eigen_nu(m, g, CrossSectionField(g, 0.0)).value >= 0.0);
    CHECK(energy_E(CrossSectionField(g, 1.0), m) < 0.0);
}

TEST_CASE("eigen_nu with Neumann ends: constant mode") {
    const auto g = section(21, BoundaryKind::Neumann);
    const auto r = eigen_nu(cubic_bistable(0.25), g, CrossSectionField(g, 0.0));
    CHECK(r.value == doctest::Approx(0.25).epsilon(1e-10));
    for (int j = 1; j < g->n_y(); ++j) CHECK(r.eigenfunction[j] == doctest::Approx(r.eigenfunction[0]).epsilon(1e-8));
    CHECK(std::abs(r.rayleigh_quotient - r.value) <= r.residual + 1e-14);
}

TEST_CASE("eigen_nu with Dirichlet ends converges to pi^2 - mu at second order") {
    for (double mu : {0.0, 1.0}) {
        double prev = 0.0;
        for (int n : {17, 33, 65}) {
            const auto g = section(n, BoundaryKind::Dirichlet);
            const auto r = eigen_nu(constant_fu(mu), g, CrossSectionField(g, 0.0));
            const double err = std::abs(r.value - (M_PI * M_PI - mu));
            CHECK(err < 1.0 * g->dy() * g->dy() * std::pow(M_PI, 4));
            for (int j = 1; j + 1 < n; ++j) CHECK(r.eigenfunction[j] > 0.0);
            CHECK(std::abs(r.rayleigh_quotient - r.value) <= r.residual + 1e-12);
            if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
            prev = err;
        }
    }
}

TEST_CASE("find_critical_point examples") {
    const auto m = cubic_bistable(0.25);
    SUBCASE("Neumann plateau") {
        const auto g = section(21, BoundaryKind::Neumann);
        const auto cp = find_critical_point(m, g, CrossSectionField(g, 0.9));
        for (int j = 0; j < g->n_y(); ++j) CHECK(cp.v[j] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(cp.energy == doctest::Approx(-1.0 / 24.0).epsilon(1e-10));
        CHECK(cp.hessian_floor == doctest::Approx(0.75).epsilon(1e-8));
        CHECK(cp.gradient_norm <= 1e-10);
    }
    SUBCASE("zero seed") {
        const auto g = section(21, BoundaryKind::Neumann);
        const auto cp = find_critical_point(m, g, CrossSectionField(g, 0.0));
        CHECK(cp.gradient_norm == 0.0);
        for (int j = 0; j < g->n_y(); ++j) CHECK(cp.v[j] == 0.0);
    }
    SUBCASE("Dirichlet unit interval has no nontrivial minimizer") {
        // nu0 = pi^2 + a is large: every seed collapses to 0, which is reported.
        const auto g = section(33, BoundaryKind::Dirichlet);
        const auto cp = find_critical_point(m, g, CrossSectionField(g, 0.9));
        CHECK(cp.trivial);
        CHECK(cp.status.find("no nontrivial minimizer") != std::string::npos);
    }
    SUBCASE("wide Dirichlet strip has one with E < 0") {
        const auto g = section(61, BoundaryKind::Dirichlet, 30.0);
        const auto cp = find_critical_point(m, g, CrossSectionField(g, 0.9));
        CHECK_FALSE(cp.trivial);
        double vmax = 0.0;
        for (int j = 0; j < g->n_y(); ++j) vmax = std::max(vmax, cp.v[j]);
        CHECK(vmax > 0.5);
        CHECK(vmax < 1.0);
        CHECK(cp.energy < 0.0);
        CHECK(cp.hessian_floor >= 0.0);
        CHECK(cp.gradient_norm <= 1e-10);
    }
}

TEST_CASE("E decreases along the cross-section flow") {
    const auto g = section(41, BoundaryKind::Dirichlet, 20.0);
    CrossSectionField v(g, 0.6);
    const auto e = cross_section_flow(tristable(0.15, 0.5, 0.75, 20.0), v, 0.05, 400);
    for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] <= e[k - 1] + 1e-14);
}

TEST_CASE("check_H3 examples") {
    GridConfig c;
    const auto g = build_grid(c);
    const auto m = cubic_bistable(0.25);
    const auto low = check_H3(m, g, 0.1);
    CHECK(low.discriminant_positive);
    CHECK(low.phi_nonpositive);
    CHECK(low.best_phi < 0.0);
    const auto high = check_H3(m, g, 1.0);
    CHECK(high.discriminant_positive);
    CHECK_FALSE(high.phi_nonpositive);
    CHECK(high.nu0 == doctest::Approx(0.25).epsilon(1e-9));
}
