#include <cmath>

#include "doctest.h"
#include "twave/reaction.hpp"

using namespace twave;

namespace {

GridPtr one_d() { return build_grid(GridConfig{}); }

GridPtr strip(int n_y) {
    GridConfig c;
    c.n_y = n_y;
    c.n_z = 32;
    c.bc_left = c.bc_right = BoundaryKind::Neumann;
    return build_grid(c);
}

}  // namespace

TEST_CASE("eval_f on the cubic") {
    const auto m = cubic_bistable(0.25);
    CHECK(m.f(0.0, 0.0) == 0.0);
    CHECK(m.f(1.0, 0.0) == 0.0);
    CHECK(m.f(0.5, 0.0) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    const auto g = one_d();
    Field u(g, 0.5);
    const Field r = eval_f(m, u);
    CHECK(r(0, 7) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("eval_f fails fast on non-finite values") {
    ReactionModel bad = cubic_bistable(0.25);
    bad.f = [](double u, double) { return u > 0.9 ? std::nan("") : 0.0; };
    CHECK_THROWS_AS(eval_f(bad, Field(one_d(), 1.0)), NumericalError);
}

TEST_CASE("eval_V examples") {
    const auto m = cubic_bistable(0.25);
    CHECK(eval_V(m, 0.0, 0.0) == 0.0);
    CHECK(eval_V(m, 1.0, 0.0) == doctest::Approx(-1.0 / 24.0).epsilon(1e-14));
    CHECK(eval_V(m, 2.0, 0.0) == eval_V(m, 1.0, 0.0));
    CHECK(eval_V(m, -1.0, 0.0) == 0.0);
}

TEST_CASE("eval_V quadrature fallback agrees with the closed form") {
    ReactionModel q = cubic_bistable(0.3);
    q.V_exact = nullptr;
    const auto exact = cubic_bistable(0.3);
    for (double u : {0.1, 0.4, 0.77, 1.0, 1.5})
        CHECK(eval_V(q, u, 0.0) == doctest::Approx(eval_V(exact, u, 0.0)).epsilon(1e-12));
}

TEST_CASE("-dV/du = f on (0, 1)") {
    const auto g = strip(9);
    for (const auto& m : {cubic_bistable(0.25), cubic_heterogeneous(0.25, 0.1, 0.0, 1.0), tristable(0.15, 0.5, 0.75, 20.0)})
        for (int j = 0; j < g->n_y(); ++j)
            for (double u = 0.05; u < 1.0; u += 0.05) {
                const double y = g->y(j), h = 1e-5;
                const double dV = (eval_V(m, u + h, y) - eval_V(m, u - h, y)) / (2.0 * h);
                CHECK(-dV == doctest::Approx(m.f(u, y)).epsilon(1e-6).scale(1.0));
            }
}

TEST_CASE("cubic roots by sign changes") {
    const double a = 0.3;
    const auto m = cubic_bistable(a);
    std::vector<double> roots;
    const int n = 1000;
    for (int k = 0; k <= n; ++k) {
        const double u = static_cast<double>(k) / n;
        if (m.f(u, 0.0) == 0.0) roots.push_back(u);
        else if (k < n && m.f(u, 0.0) * m.f(static_cast<double>(k + 1) / n, 0.0) < 0.0) roots.push_back(u + 0.5 / n);
    }
    REQUIRE(roots.size() == 3);
    CHECK(roots[0] == 0.0);
    CHECK(roots[1] == doctest::Approx(a).epsilon(1e-3));
    CHECK(roots[2] == 1.0);
}

TEST_CASE("check_hypotheses examples") {
    const auto g = one_d();
    const auto good = check_hypotheses(cubic_bistable(0.25), *g);
    CHECK(good.h1);
    REQUIRE(good.integral.size() == 1);
    CHECK(good.integral[0] == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
    CHECK(good.integral_positive);
    CHECK(good.nondegenerate);

    const auto slow = check_hypotheses(cubic_bistable(0.6), *g);
    CHECK(slow.integral[0] == doctest::Approx(1.0 / 12.0 - 0.1).epsilon(1e-12));
    CHECK_FALSE(slow.integral_positive);

    const auto lin = check_hypotheses(linear_growth(), *g);
    CHECK_FALSE(lin.h1);
    CHECK(lin.worst_f1 == doctest::Approx(1.0));
}

TEST_CASE("heterogeneous model follows a(y)") {
    const auto g = strip(5);
    const auto m = cubic_heterogeneous(0.25, 0.1, 0.0, 1.0);
    const auto rep = check_hypotheses(m, *g);
    CHECK(rep.h1);
    // a(y_min) = 0.35 and a(y_max) = 0.15, so the integral 1/12 - a/6 varies across the section.
    CHECK(rep.integral.front() == doctest::Approx(1.0 / 12.0 - 0.35 / 6.0).epsilon(1e-10));
    CHECK(rep.integral.back() == doctest::Approx(1.0 / 12.0 - 0.15 / 6.0).epsilon(1e-10));
}

TEST_CASE("shifted model vanishes at h = 0 and sees the invariant box") {
    const auto g = strip(5);
    CrossSectionField v(g, 0.5);
    const auto base = tristable(0.15, 0.5, 0.75, 20.0);
    const auto s = shifted_model(base, v);
    CHECK(s.f(0.0, 0.3) == 0.0);
    CHECK(eval_V(s, 0.0, 0.3) == 0.0);
    CHECK(s.u_top(0.3) == doctest::Approx(0.5));
    CHECK(max_abs_fu(s, *g) <= max_abs_fu(base, *g));
}

TEST_CASE("max_abs_fu of the cubic") {
    // f_u = -3u^2 + 2(1 + a)u - a; on [0, 1] the extremes are at u = 1 or the vertex.
    const double a = 0.25;
    const double vertex = (1.0 + a) / 3.0;
    const double expect = std::max({a, 1.0 - a, -3.0 * vertex * vertex + 2.0 * (1.0 + a) * vertex - a});
    CHECK(max_abs_fu(cubic_bistable(a), *one_d()) == doctest::Approx(expect).epsilon(1e-3));
}
