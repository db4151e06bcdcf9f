#include <cmath>
#include <random>

#include "doctest.h"
#include "twave/weighted.hpp"

using namespace twave;

namespace {

GridPtr line(double z0, double z1, int n_z, BoundaryKind lo = BoundaryKind::Neumann,
             BoundaryKind hi = BoundaryKind::Neumann) {
    GridConfig c;
    c.n_z = n_z;
    c.z_min = z0;
    c.z_max = z1;
    c.bc_z_lo = lo;
    c.bc_z_hi = hi;
    return build_grid(c);
}

Field sample(const GridPtr& g, double (*f)(double)) {
    Field u(g);
    for (int j = 0; j < g->n_y(); ++j)
        for (int i = 0; i < g->n_z(); ++i) u(j, i) = f(g->z(i));
    return u;
}

double gauss(double z) { return std::exp(-z * z); }
double front(double z) { return 0.5 * (1.0 - std::tanh(z / 2.0)); }

}  // namespace

TEST_CASE("weighted_norm_l2 examples") {
    const auto g = line(0.0, 1.0, 401);
    CHECK(weighted_norm_l2(Field(g, 0.0), {2.0, 0.0}) == 0.0);
    const double exact = std::sqrt((std::exp(2.0) - 1.0) / 2.0);
    CHECK(weighted_norm_l2(Field(g, 1.0), {2.0, 0.0}) == doctest::Approx(exact).epsilon(1e-5));
    CHECK(exact == doctest::Approx(1.787).epsilon(1e-3));
}

TEST_CASE("weighted_norm_l2 overflow guard") {
    const auto g = line(-20.0, 20.0, 401);
    CHECK_THROWS_WITH_AS(weighted_norm_l2(Field(g, 1.0), {100.0, 0.0}), doctest::Contains("re-reference"),
                         WeightOverflow);
    const auto half = line(0.0, 10.0, 101);
    CHECK_THROWS_AS(weighted_norm_l2(Field(half, 1.0), {100.0, 0.0}), WeightOverflow);
    CHECK(std::isfinite(weighted_norm_l2(Field(half, 1.0), {100.0, 5.0})));
}

TEST_CASE("weighted_norm_h1 examples") {
    const auto g = line(0.0, 5.0, 2001);
    const WeightedMeasure m{1.0, 0.0};
    CHECK(weighted_norm_h1(Field(g, 0.0), m) == 0.0);
    const Field one(g, 0.8);
    CHECK(weighted_norm_h1(one, m) == weighted_norm_l2(one, m));
    const Field e = sample(g, [](double z) { return std::exp(-z); });
    const double exact = std::sqrt(2.0 * (1.0 - std::exp(-5.0)));
    CHECK(weighted_norm_h1(e, m) == doctest::Approx(exact).epsilon(1e-5));
}

TEST_CASE("translate examples") {
    const auto g = line(-20.0, 20.0, 801);
    const Field u = sample(g, gauss);
    CHECK(translate(u, 0.0).data() == u.data());
    const Field back = translate(translate(u, 0.7), -0.7);
    CHECK((back - u).max_abs() < 1e-6);
    const Field f = sample(g, front);
    const Field t = translate(f, 1.3);
    for (int i = 0; i + 1 < g->n_z(); ++i) CHECK(t(0, i + 1) <= t(0, i));
    CHECK_THROWS_AS(translate(u, 25.0), ConfigError);
}

TEST_CASE("weighted_inner examples") {
    const auto g = line(-5.0, 5.0, 401);
    const Field u = sample(g, front);
    const WeightedMeasure m{0.5, 0.0};
    CHECK(weighted_inner(u, Field(g, 0.0), m) == 0.0);
    CHECK(weighted_inner(u, u, m) == doctest::Approx(std::pow(weighted_norm_l2(u, m), 2)).epsilon(1e-15));
    const auto p = line(0.0, 2.0 * M_PI, 257);
    const Field s = sample(p, [](double z) { return std::sin(z); });
    const Field c = sample(p, [](double z) { return std::cos(z); });
    CHECK(std::abs(weighted_inner(s, c, {0.0, 0.0})) < 1e-12);
}

TEST_CASE("exponential shift law") {
    const auto g = line(-20.0, 20.0, 801);
    const Field u = sample(g, gauss);
    for (double c : {0.35, 1.0})
        for (double eta : {-1.0, -0.5, 0.5, 1.0}) {
            const WeightedMeasure m{c, 0.0};
            const double ratio = weighted_norm_l2(translate(u, eta), m) / weighted_norm_l2(u, m);
            CHECK(ratio == doctest::Approx(std::exp(c * eta / 2.0)).epsilon(1e-6));
        }
}

TEST_CASE("Cauchy-Schwarz on random fields") {
    const auto g = line(-5.0, 5.0, 101);
    std::mt19937 rng(11);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 200; ++trial) {
        Field u(g), v(g);
        for (auto& x : u.data()) x = d(rng);
        for (auto& x : v.data()) x = d(rng);
        const WeightedMeasure m{0.3, 0.0};
        CHECK(std::abs(weighted_inner(u, v, m)) <= weighted_norm_l2(u, m) * weighted_norm_l2(v, m));
    }
}

TEST_CASE("z_ref cancels in norm ratios") {
    const auto g = line(-10.0, 10.0, 201);
    const Field u = sample(g, front), v = sample(g, gauss);
    const double r0 = weighted_norm_l2(u, {0.6, 0.0}) / weighted_norm_l2(v, {0.6, 0.0});
    const double r1 = weighted_norm_l2(u, {0.6, 3.7}) / weighted_norm_l2(v, {0.6, 3.7});
    CHECK(r1 == doctest::Approx(r0).epsilon(1e-14));
    const double n0 = weighted_norm_l2(u, {0.6, 0.0}), n1 = weighted_norm_l2(u, {0.6, 3.7});
    CHECK(n1 == doctest::Approx(n0 * std::exp(0.6 * (0.0 - 3.7) / 2.0)).epsilon(1e-14));
}

TEST_CASE("MonotoneCubic reproduces cubics away from the ends") {
    std::vector<double> y(41);
    for (int k = 0; k < 41; ++k) {
        const double x = -2.0 + 0.1 * k;
        y[k] = 0.1 * x * x * x + x;  // monotone increasing
    }
    const MonotoneCubic p(y, -2.0, 0.1, false);
    for (double x = -1.5; x < 1.5; x += 0.037) {
        CHECK(p(x) == doctest::Approx(0.1 * x * x * x + x).epsilon(1e-10));
        CHECK(p.derivative(x) == doctest::Approx(0.3 * x * x + 1.0).epsilon(1e-9));
    }
}
