#include "twave/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "twave/evolution.hpp"

namespace twave {

namespace {

// Free nodes of the cross-section and the symmetric pair (stiffness K, mass M)
// with K = -W L_y on the free nodes.
struct CrossSystem {
    std::vector<int> free;
    Eigen::MatrixXd K;
    Eigen::VectorXd M;
};

CrossSystem cross_system(const CylinderGrid& g) {
    CrossSystem s;
    for (int j = 0; j < g.n_y(); ++j)
        if (!g.y_fixed(j)) s.free.push_back(j);
    const int n = static_cast<int>(s.free.size());
    s.K = Eigen::MatrixXd::Zero(n, n);
    s.M.resize(n);
    std::vector<int> pos(g.n_y(), -1);
    for (int k = 0; k < n; ++k) {
        pos[s.free[k]] = k;
        s.M[k] = g.y_weight(s.free[k]);
    }
    if (g.one_d()) return s;
    const double e = 1.0 / g.dy();
    for (int j = 0; j + 1 < g.n_y(); ++j) {
        const int a = pos[j], b = pos[j + 1];
        if (a >= 0) s.K(a, a) += e;
        if (b >= 0) s.K(b, b) += e;
        if (a >= 0 && b >= 0) {
            s.K(a, b) -= e;
            s.K(b, a) -= e;
        }
    }
    return s;
}

Eigen::VectorXd gather(const CrossSystem& s, const CrossSectionField& v) {
    Eigen::VectorXd x(s.free.size());
    for (std::size_t k = 0; k < s.free.size(); ++k) x[k] = v[s.free[k]];
    return x;
}

void scatter(const CrossSystem& s, const Eigen::VectorXd& x, CrossSectionField& v) {
    for (std::size_t k = 0; k < s.free.size(); ++k) v[s.free[k]] = x[k];
}

// Delta_y v + f(v, y) on the free nodes.
Eigen::VectorXd residual(const CrossSystem& s, const ReactionModel& model, const CylinderGrid& g,
                         const Eigen::VectorXd& x) {
    Eigen::VectorXd r = -(s.K * x).cwiseQuotient(s.M);
    for (int k = 0; k < x.size(); ++k) r[k] += model.f(x[k], g.y(s.free[k]));
    return r;
}

}  // namespace

double energy_E(const CrossSectionField& v, const ReactionModel& model) {
    const auto& g = v.grid();
    double e = 0.0;
    for (int j = 0; j < g.n_y(); ++j) e += g.y_weight(j) * eval_V(model, v[j], g.y(j));
    if (!g.one_d())
        for (int j = 0; j + 1 < g.n_y(); ++j) {
            const double d = (v[j + 1] - v[j]) / g.dy();
            e += 0.5 * g.dy() * d * d;
        }
    return e;
}

EigenResult eigen_nu(const ReactionModel& model, const GridPtr& grid, const CrossSectionField& at,
                     double tolerance, int max_iterations) {
    const auto& g = *grid;
    const CrossSystem s = cross_system(g);
    const int n = static_cast<int>(s.free.size());
    if (n == 0) throw NumericalError("cross-section has no free nodes");
    Eigen::MatrixXd A = s.K;
    for (int k = 0; k < n; ++k) A(k, k) -= s.M[k] * model.f_u(at[s.free[k]], g.y(s.free[k]));

    // Gershgorin lower bound of M^{-1} A, pushed one unit below.
    double lower = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        double off = 0.0;
        for (int l = 0; l < n; ++l)
            if (l != k) off += std::abs(A(k, l));
        lower = std::min(lower, (A(k, k) - off) / s.M[k]);
    }
    const double shift = lower - 1.0;
    Eigen::MatrixXd B = A;
    for (int k = 0; k < n; ++k) B(k, k) -= shift * s.M[k];
    const Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NumericalError("eigen_nu: shifted operator is not definite");

    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    auto mnorm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(s.M.cwiseProduct(v))); };
    x /= mnorm(x);
    EigenResult res;
    double mu = x.dot(A * x);
    double resid = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iterations; ++it) {
        mu = x.dot(A * x);
        const Eigen::VectorXd r = A * x - mu * s.M.cwiseProduct(x);
        resid = std::sqrt(r.dot(r.cwiseQuotient(s.M)));
        if (resid <= tolerance * std::max(1.0, std::abs(mu))) break;
        x = llt.solve(s.M.cwiseProduct(x));
        x /= mnorm(x);
    }
    if (resid > tolerance * std::max(1.0, std::abs(mu)))
        throw NumericalError("eigen_nu: inverse iteration did not converge");
    if (x.sum() < 0.0) x = -x;
    res.value = mu;
    res.rayleigh_quotient = x.dot(A * x) / x.dot(s.M.cwiseProduct(x));
    res.residual = resid;
    res.iterations = it;
    res.eigenfunction = CrossSectionField(grid, 0.0);
    scatter(s, x, res.eigenfunction);
    return res;
}

std::vector<double> cross_section_flow(const ReactionModel& model, CrossSectionField& v, double dt, int steps) {
    const auto& g = v.grid();
    const CrossSystem s = cross_system(g);
    const int n = static_cast<int>(s.free.size());
    // (M + dt K) x_new = M (x + dt f(x))
    Eigen::MatrixXd B = dt * s.K;
    for (int k = 0; k < n; ++k) B(k, k) += s.M[k];
    const Eigen::LLT<Eigen::MatrixXd> llt(B);
    std::vector<double> energies{energy_E(v, model)};
    Eigen::VectorXd x = gather(s, v);
    for (int step = 0; step < steps; ++step) {
        Eigen::VectorXd rhs(n);
        for (int k = 0; k < n; ++k) rhs[k] = s.M[k] * (x[k] + dt * model.f(x[k], g.y(s.free[k])));
        x = llt.solve(rhs);
        scatter(s, x, v);
        energies.push_back(energy_E(v, model));
    }
    return energies;
}

CriticalPoint find_critical_point(const ReactionModel& model, const GridPtr& grid, const CrossSectionField& seed,
                                  const CriticalPointOptions& opt) {
    const auto& g = *grid;
    const CrossSystem s = cross_system(g);
    const int n = static_cast<int>(s.free.size());
    CrossSectionField v(grid, 0.0);
    double seed_max = 0.0;
    for (int k = 0; k < n; ++k) {
        v[s.free[k]] = std::clamp(seed[s.free[k]], 0.0, 1.0);
        seed_max = std::max(seed_max, v[s.free[k]]);
    }

    double lip = 0.0;
    for (int k = 0; k <= 200; ++k)
        for (int j : s.free) lip = std::max(lip, std::abs(model.f_u(k / 200.0, g.y(j))));
    const double dt = 0.5 / std::max(lip, 1e-3);

    CriticalPoint cp;
    Eigen::VectorXd x = gather(s, v);
    auto sup = [](const Eigen::VectorXd& r) { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; };

    // Gradient flow into the basin of a local minimizer.
    {
        Eigen::MatrixXd B = dt * s.K;
        for (int k = 0; k < n; ++k) B(k, k) += s.M[k];
        const Eigen::LLT<Eigen::MatrixXd> llt(B);
        int step = 0;
        for (; step < opt.max_flow_steps; ++step) {
            if (sup(residual(s, model, g, x)) <= opt.flow_tolerance) break;
            Eigen::VectorXd rhs(n);
            for (int k = 0; k < n; ++k) rhs[k] = s.M[k] * (x[k] + dt * model.f(x[k], g.y(s.free[k])));
            x = llt.solve(rhs);
        }
        cp.status = "flow steps " + std::to_string(step);
    }

    // Damped Newton polish.
    Eigen::VectorXd r = residual(s, model, g, x);
    int it = 0;
    for (; it < opt.max_newton_iterations && sup(r) > opt.newton_tolerance; ++it) {
        Eigen::MatrixXd J = -s.K;
        for (int k = 0; k < n; ++k) {
            J.row(k) /= s.M[k];
            J(k, k) += model.f_u(x[k], g.y(s.free[k]));
        }
        const Eigen::VectorXd dx = J.fullPivLu().solve(-r);
        double lambda = 1.0;
        const double r0 = sup(r);
        for (int ls = 0; ls < 30; ++ls) {
            const Eigen::VectorXd trial = x + lambda * dx;
            const Eigen::VectorXd rt = residual(s, model, g, trial);
            if (sup(rt) < r0 || ls == 29) {
                x = trial;
                r = rt;
                break;
            }
            lambda *= 0.5;
        }
    }
    scatter(s, x, v);
    cp.v = v;
    cp.gradient_norm = sup(r);
    cp.energy = energy_E(v, model);
    cp.status += ", newton iterations " + std::to_string(it);
    if (cp.gradient_norm > opt.newton_tolerance) {
        cp.status += ", not converged";
        throw NumericalError("find_critical_point: Newton did not converge (" + cp.status + ")");
    }
    double vmax = 0.0;
    for (int j = 0; j < g.n_y(); ++j) vmax = std::max(vmax, std::abs(v[j]));
    cp.trivial = seed_max > 1e-8 && vmax < 1e-6;
    if (cp.trivial) cp.status += ", no nontrivial minimizer: converged to the trivial state";
    cp.hessian_floor = eigen_nu(model, grid, v).value;
    return cp;
}

H3Report check_H3(const ReactionModel& model, const GridPtr& grid, double c_trial, double budget, double dt) {
    if (!(c_trial > 0.0)) throw ConfigError("check_H3: trial speed must be positive");
    H3Report rep;
    const auto& g = *grid;
    rep.nu0 = eigen_nu(model, grid, CrossSectionField(grid, 0.0)).value;
    rep.discriminant = c_trial * c_trial + 4.0 * rep.nu0;
    rep.discriminant_positive = rep.discriminant > 0.0;

    const CriticalPoint top = find_critical_point(model, grid, CrossSectionField(grid, 1.0));
    Field u(grid);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i) u(j, i) = top.v[j] * 0.5 * (1.0 - std::tanh(g.z(i) / 2.0));
    u = apply_boundary(u);

    const WeightedMeasure m{c_trial, 0.0};
    const Integrator integ(model, grid, c_trial, std::min(dt, dt_max(model, g)));
    EvolutionState st{0.0, u, c_trial, 0, 0.0};
    rep.initial_phi = energy_phi(u, model, m);
    rep.best_phi = rep.initial_phi;
    while (st.t < budget) {
        st = integ.step(st);
        rep.best_phi = std::min(rep.best_phi, energy_phi(st.u, model, m));
    }
    rep.phi_nonpositive = rep.best_phi <= 0.0;
    return rep;
}

}  // namespace twave
