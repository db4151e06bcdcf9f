#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "twave/evolution.hpp"
#include "twave/wave_solver.hpp"

using namespace twave;

namespace {

GridPtr closed_line(int n_z = 401, double z0 = -20.0, double z1 = 20.0) {
    GridConfig c;
    c.n_z = n_z;
    c.z_min = z0;
    c.z_max = z1;
    c.bc_z_lo = BoundaryKind::Neumann;
    c.bc_z_hi = BoundaryKind::Neumann;
    return build_grid(c);
}

GridPtr front_line() { return build_grid(GridConfig{}); }

}  // namespace

TEST_CASE("step keeps the equilibria") {
    const auto g = closed_line();
    const auto m = cubic_bistable(0.25);
    for (double level : {0.0, 1.0}) {
        EvolutionState s{0.0, Field(g, level), 0.3, 0, 0.0};
        s = step(s, m, 0.1);
        for (double x : s.u.data()) CHECK(std::abs(x - level) <= 1e-13);
        CHECK(s.t == doctest::Approx(0.1));
    }
}

TEST_CASE("step moves off the unstable zero upward") {
    const auto g = closed_line();
    const double a = 0.25;
    const auto m = cubic_bistable(a);
    const Integrator integ(m, g, 0.0, 0.1);
    EvolutionState s{0.0, Field(g, a + 1e-3), 0.0, 0, 0.0};
    double prev = a + 1e-3;
    for (int k = 0; k < 20; ++k) {
        s = integ.step(s);
        CHECK(s.u(0, 200) > prev);
        prev = s.u(0, 200);
    }
}

TEST_CASE("Integrator rejects steps above dt_max") {
    const auto g = closed_line();
    const auto m = cubic_bistable(0.25);
    const double bound = dt_max(m, *g);
    CHECK(bound == doctest::Approx(0.5 / max_abs_fu(m, *g)));
    CHECK_THROWS_AS(Integrator(m, g, 0.0, 1.01 * bound), ConfigError);
    CHECK_NOTHROW(Integrator(m, g, 0.0, bound));
}

TEST_CASE("advance lands on the end time and stays in [0, 1]") {
    const auto g = front_line();
    const auto m = cubic_bistable(0.25);
    const Integrator integ(m, g, 0.2, 0.05);
    EvolutionState s{0.0, front_seed(g, CrossSectionField(g, 1.0)), 0.2, 0, 0.0};
    s = integ.advance(s, 3.0);
    CHECK(s.t == doctest::Approx(3.0).epsilon(1e-12));
    for (double x : s.u.data()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    CHECK(s.clipped <= 1e-12);
}

TEST_CASE("energy_phi of the zero field") {
    const auto g = front_line();
    CHECK(energy_phi(Field(g, 0.0), cubic_bistable(0.25), {0.3, 0.0}) == 0.0);
}

TEST_CASE("energy_phi of a Gaussian bump against adaptive quadrature") {
    const auto g = closed_line(4001, -10.0, 10.0);
    Field u(g);
    for (int i = 0; i < g->n_z(); ++i) u(0, i) = std::exp(-g->z(i) * g->z(i));
    const auto m = cubic_bistable(0.25);
    const double c = 0.3;
    auto integrand = [&](double z) {
        const double e = std::exp(-z * z), uz = -2.0 * z * e;
        return std::exp(c * z) * (0.5 * uz * uz + eval_V(m, e, 0.0));
    };
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -10.0, 10.0, 15, 1e-14);
    CHECK(energy_phi(u, m, {c, 0.0}) == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("dissipation identity: residual is O(dt) and Phi never rises") {
    const auto g = front_line();
    const auto m = cubic_bistable(0.25);
    const double c = 0.35;
    std::vector<double> residual;
    for (double dt : {0.1, 0.05, 0.025}) {
        const Integrator integ(m, g, c, dt);
        DissipationMonitor mon(m, {c, 0.0});
        EvolutionState s{0.0, front_seed(g, CrossSectionField(g, 1.0), 3.0, 1.0), c, 0, 0.0};
        mon.add(s);
        while (s.t < 10.0 - 1e-9) {
            s = integ.step(s);
            mon.add(s);
        }
        const auto& rep = mon.report();
        CHECK(rep.monotone);
        CHECK(rep.phi_drop > 0.0);
        residual.push_back(rep.relative_residual);
    }
    CHECK(residual[0] / residual[1] == doctest::Approx(2.0).epsilon(0.2));
    CHECK(residual[1] / residual[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("dissipation_check agrees with the streaming monitor") {
    const auto g = front_line();
    const auto m = cubic_bistable(0.25);
    const Integrator integ(m, g, 0.3, 0.1);
    std::vector<EvolutionState> run{{0.0, front_seed(g, CrossSectionField(g, 1.0)), 0.3, 0, 0.0}};
    DissipationMonitor mon(m, {0.3, 0.0});
    mon.add(run.back());
    for (int k = 0; k < 30; ++k) {
        run.push_back(integ.step(run.back()));
        mon.add(run.back());
    }
    const auto rep = dissipation_check(run, m, {0.3, 0.0});
    CHECK(rep.phi_drop == doctest::Approx(mon.report().phi_drop).epsilon(1e-14));
    CHECK(rep.dissipated == doctest::Approx(mon.report().dissipated).epsilon(1e-14));
}

TEST_CASE("comparison_test examples") {
    const auto g = front_line();
    const auto m = cubic_bistable(0.25);
    const Field high = front_seed(g, CrossSectionField(g, 1.0), 1.0, 1.5);
    SUBCASE("identical data") {
        const auto rep = comparison_test(high, high, m, 0.0, 0.1, 5.0);
        CHECK(rep.ordered);
        CHECK(rep.worst_violation <= 0.0);
        CHECK(rep.checks > 0);
    }
    SUBCASE("shifted down by 0.1") {
        Field low = high;
        for (auto& x : low.data()) x = std::max(x - 0.1, 0.0);
        const auto rep = comparison_test(low, high, m, 0.0, 0.1, 10.0);
        CHECK(rep.ordered);
        CHECK(rep.first_violation_time < 0.0);
    }
    SUBCASE("unordered initial data are rejected") {
        Field low = high;
        low(0, 100) += 0.2;
        CHECK_THROWS_AS(comparison_test(low, high, m, 0.0, 0.1, 1.0), ConfigError);
    }
}

TEST_CASE("randomized ordered pairs stay ordered") {
    const auto g = front_line();
    const auto m = cubic_bistable(0.25);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int p = 0; p < 25; ++p) {
        Field high = front_seed(g, CrossSectionField(g, 0.5 + 0.5 * unit(rng)), 10.0 * unit(rng) - 5.0, 0.5 + 2.0 * unit(rng));
        for (auto& x : high.data()) x = std::clamp(x + 0.05 * unit(rng), 0.0, 1.0);
        high = apply_boundary(high);
        Field low = high;
        for (auto& x : low.data()) x = std::max(x - 0.2 * unit(rng), 0.0);
        const auto rep = comparison_test(low, high, m, 0.2 * unit(rng), 0.1, 5.0);
        CHECK(rep.ordered);
        CHECK(rep.worst_violation <= kOrderTolerance);
    }
}
