#include "twave/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace twave {

namespace {

// Coefficients (ascending powers) of prod_k (u - r_k).
std::vector<double> expand_roots(const std::vector<double>& roots) {
    std::vector<double> c{1.0};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    return c;
}

std::vector<double> eval_roots(const std::vector<std::function<double(double)>>& roots, double y) {
    std::vector<double> r(roots.size());
    for (std::size_t k = 0; k < roots.size(); ++k) r[k] = roots[k](y);
    return r;
}

}  // namespace

ReactionModel polynomial_model(std::string label, double scale, std::vector<std::function<double(double)>> roots) {
    ReactionModel m;
    m.label = std::move(label);
    m.f = [scale, roots](double u, double y) {
        double p = scale;
        for (const auto& r : roots) p *= (u - r(y));
        return p;
    };
    m.f_u = [scale, roots](double u, double y) {
        const auto r = eval_roots(roots, y);
        double s = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) {
            double p = 1.0;
            for (std::size_t l = 0; l < r.size(); ++l)
                if (l != k) p *= (u - r[l]);
            s += p;
        }
        return scale * s;
    };
    m.V_exact = [scale, roots](double u, double y) {
        const double x = std::clamp(u, 0.0, 1.0);
        const auto c = expand_roots(eval_roots(roots, y));
        // -scale * int_0^x sum c_k s^k ds, Horner on x^{k+1}/(k+1).
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k] / static_cast<double>(k + 1);
        return -scale * acc * x;
    };
    return m;
}

ReactionModel cubic_bistable(double a) {
    auto m = polynomial_model("cubic", -1.0, {[](double) { return 0.0; }, [a](double) { return a; },
                                               [](double) { return 1.0; }});
    m.f = [a](double u, double) { return u * (1.0 - u) * (u - a); };
    m.f_u = [a](double u, double) { return -3.0 * u * u + 2.0 * (1.0 + a) * u - a; };
    m.V_exact = [a](double u, double) {
        const double x = std::clamp(u, 0.0, 1.0);
        const double x2 = x * x;
        return 0.25 * x2 * x2 - (1.0 + a) * x2 * x / 3.0 + 0.5 * a * x2;
    };
    return m;
}

ReactionModel cubic_heterogeneous(double a0, double a1, double y_min, double y_max) {
    const double len = y_max - y_min;
    auto a = [=](double y) { return a0 + a1 * std::cos(std::numbers::pi * (y - y_min) / len); };
    return polynomial_model("cubic_y", -1.0, {[](double) { return 0.0; }, a, [](double) { return 1.0; }});
}

ReactionModel tristable(double a1, double b, double a2, double k) {
    auto cst = [](double v) { return [v](double) { return v; }; };
    return polynomial_model("tristable", -k, {cst(0.0), cst(a1), cst(b), cst(a2), cst(1.0)});
}

ReactionModel linear_growth() {
    ReactionModel m = polynomial_model("linear", 1.0, {[](double) { return 0.0; }});
    return m;
}

ReactionModel shifted_model(const ReactionModel& base, const CrossSectionField& v) {
    const auto& g = v.grid();
    std::vector<double> vy = v.data();
    const double y0 = g.y_min(), dy = g.dy();
    const int ny = g.n_y();
    auto vat = [vy, y0, dy, ny](double y) {
        if (ny == 1) return vy[0];
        const double s = std::clamp((y - y0) / dy, 0.0, static_cast<double>(ny - 1));
        const int k = std::min(static_cast<int>(s), ny - 2);
        const double t = s - k;
        return (1.0 - t) * vy[k] + t * vy[k + 1];
    };
    ReactionModel m;
    m.label = base.label + "_shifted";
    m.holder_exponent = base.holder_exponent;
    auto f = base.f;
    auto fu = base.f_u;
    m.f = [f, vat](double h, double y) {
        const double v0 = vat(y);
        return f(v0 + h, y) - f(v0, y);
    };
    m.f_u = [fu, vat](double h, double y) { return fu(vat(y) + h, y); };
    m.u_top = [vat](double y) { return std::max(0.0, 1.0 - vat(y)); };
    // V_g(h) = V(v+h) - V(v) - V'(v) h, with V'(v) = -f(v) chi_[0,1](v).
    ReactionModel base_copy = base;
    m.V_exact = [base_copy, vat](double h, double y) {
        const double v0 = vat(y);
        const double vp = (v0 >= 0.0 && v0 <= 1.0) ? -base_copy.f(v0, y) : 0.0;
        return eval_V(base_copy, v0 + h, y) - eval_V(base_copy, v0, y) - vp * h;
    };
    return m;
}

Field eval_f(const ReactionModel& model, const Field& u) {
    const auto& g = u.grid();
    Field out(u.grid_ptr());
    for (int j = 0; j < g.n_y(); ++j) {
        const double y = g.y(j);
        for (int i = 0; i < g.n_z(); ++i) {
            const double v = model.f(u(j, i), y);
            if (!std::isfinite(v)) throw NumericalError("reaction term is not finite");
            out(j, i) = v;
        }
    }
    return out;
}

double eval_V(const ReactionModel& model, double u, double y) {
    if (model.V_exact) return model.V_exact(u, y);
    const double x = std::clamp(u, 0.0, 1.0);
    if (x == 0.0) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    return -gauss_kronrod<double, 15>::integrate([&](double s) { return model.f(s, y); }, 0.0, x, 10, 1e-13);
}

double max_abs_fu(const ReactionModel& model, const CylinderGrid& grid) {
    double m = 0.0;
    for (int j = 0; j < grid.n_y(); ++j)
    {
        const double y = grid.y(j);
        const double top = model.u_top ? model.u_top(y) : 1.0;
        for (int k = 0; k <= 200; ++k) m = std::max(m, std::abs(model.f_u(top * k / 200.0, y)));
    }
    return m;
}

HypothesisReport check_hypotheses(const ReactionModel& model, const CylinderGrid& grid) {
    HypothesisReport r;
    constexpr int kU = 400;
    r.h1 = true;
    r.integral_positive = true;
    r.nondegenerate = true;
    const double gamma = model.holder_exponent;
    for (int j = 0; j < grid.n_y(); ++j) {
        const double y = grid.y(j);
        const double f0 = model.f(0.0, y), f1 = model.f(1.0, y);
        r.worst_f0 = std::max(r.worst_f0, std::abs(f0));
        r.worst_f1 = std::max(r.worst_f1, f1);
        if (f0 != 0.0 || f1 > 0.0) r.h1 = false;
        if (!(model.f_u(0.0, y) < 0.0 && model.f_u(1.0, y) < 0.0)) r.nondegenerate = false;
        double prev_f = f0, prev_fu = model.f_u(0.0, y);
        for (int k = 1; k <= kU; ++k) {
            const double u = static_cast<double>(k) / kU;
            const double fv = model.f(u, y), fuv = model.f_u(u, y);
            const double step = std::pow(1.0 / kU, gamma);
            r.holder_quotient_f = std::max(r.holder_quotient_f, std::abs(fv - prev_f) / step);
            r.holder_quotient_fu = std::max(r.holder_quotient_fu, std::abs(fuv - prev_fu) / step);
            prev_f = fv;
            prev_fu = fuv;
        }
        using boost::math::quadrature::gauss_kronrod;
        const double integral =
            gauss_kronrod<double, 31>::integrate([&](double s) { return model.f(s, y); }, 0.0, 1.0, 10, 1e-14);
        r.integral.push_back(integral);
        if (!(integral > 0.0)) r.integral_positive = false;
    }
    return r;
}

}  // namespace twave
