#include "twave/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace twave {

namespace {

constexpr double kClipFailure = 1e-9;

}  // namespace

double dt_max(const ReactionModel& model, const CylinderGrid& grid) {
    const double L = max_abs_fu(model, grid);
    return L > 0.0 ? 0.5 / L : 1.0;
}

struct Integrator::Factor {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

Integrator::Integrator(ReactionModel model, GridPtr grid, double frame_speed, double dt)
    : model_(std::move(model)), grid_(std::move(grid)), c_(frame_speed), dt_(dt) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const double limit = dt_max(model_, *grid_);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "time step " << dt << " exceeds the stability limit " << limit;
        throw ConfigError(os.str());
    }
    const auto& g = *grid_;
    const LinearOperator op(grid_, c_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 5);
    const int ny = g.n_y(), nz = g.n_z();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nz; ++i) {
            const auto k = static_cast<int>(g.index(j, i));
            const auto r = op.row(j, i);
            trip.emplace_back(k, k, 1.0 - dt * r.center);
            if (r.z_minus != 0.0) trip.emplace_back(k, k - 1, -dt * r.z_minus);
            if (r.z_plus != 0.0) trip.emplace_back(k, k + 1, -dt * r.z_plus);
            if (r.y_minus != 0.0) trip.emplace_back(k, k - nz, -dt * r.y_minus);
            if (r.y_plus != 0.0) trip.emplace_back(k, k + nz, -dt * r.y_plus);
        }
    Eigen::SparseMatrix<double> A(static_cast<int>(g.size()), static_cast<int>(g.size()));
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    auto f = std::make_shared<Factor>();
    f->lu.analyzePattern(A);
    f->lu.factorize(A);
    if (f->lu.info() != Eigen::Success) throw NumericalError("implicit operator factorization failed");
    factor_ = std::move(f);
}

EvolutionState Integrator::step(const EvolutionState& s) const {
    const auto& g = *grid_;
    if (s.u.size() != g.size()) throw ConfigError("state does not live on the integrator grid");
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(g.size()));
    for (int j = 0; j < g.n_y(); ++j) {
        const double y = g.y(j);
        for (int i = 0; i < g.n_z(); ++i) {
            const auto k = static_cast<Eigen::Index>(g.index(j, i));
            rhs[k] = g.fixed(j, i) ? 0.0 : s.u(j, i) + dt_ * model_.f(s.u(j, i), y);
        }
    }
    const Eigen::VectorXd x = factor_->lu.solve(rhs);
    if (factor_->lu.info() != Eigen::Success) throw NumericalError("implicit solve failed");
    EvolutionState out;
    out.t = s.t + dt_;
    out.frame_speed = c_;
    out.window_shift = s.window_shift;
    out.u = Field(s.u.grid_ptr());
    double clip = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double v = x[static_cast<Eigen::Index>(k)];
        if (!std::isfinite(v)) throw NumericalError("state became non-finite");
        const double cl = std::clamp(v, 0.0, 1.0);
        clip = std::max(clip, std::abs(v - cl));
        out.u.data()[k] = cl;
    }
    out.clipped = clip;
    if (clip > kClipFailure) {
        std::ostringstream os;
        os << "bound violation " << clip << " at t = " << out.t;
        throw NumericalError(os.str());
    }
    return out;
}

EvolutionState Integrator::advance(EvolutionState state, double t_end) const {
    while (state.t < t_end - 1e-12 * std::max(1.0, std::abs(t_end))) state = step(state);
    return state;
}

EvolutionState step(const EvolutionState& state, const ReactionModel& model, double dt) {
    return Integrator(model, state.u.grid_ptr(), state.frame_speed, dt).step(state);
}

EnergyParts energy_parts(const Field& u, const ReactionModel& model, const WeightedMeasure& m) {
    const auto& g = u.grid();
    const auto wz = axial_weights(g, m);
    EnergyParts e;
    const double dz = g.dz();
    for (int j = 0; j < g.n_y(); ++j) {
        const double wy = g.y_weight(j);
        const double y = g.y(j);
        for (int i = 0; i < g.n_z(); ++i) {
            const double v = wy * wz[i] * eval_V(model, u(j, i), y);
            e.potential += v;
            e.magnitude += std::abs(v);
        }
        for (int i = 0; i + 1 < g.n_z(); ++i) {
            const double d = u(j, i + 1) - u(j, i);
            const double v = 0.5 * wy / dz * std::exp(m.c * (g.z(i) + 0.5 * dz - m.z_ref)) * d * d;
            e.gradient += v;
            e.magnitude += v;
        }
    }
    if (!g.one_d()) {
        const double dy = g.dy();
        for (int j = 0; j + 1 < g.n_y(); ++j)
            for (int i = 0; i < g.n_z(); ++i) {
                const double d = u(j + 1, i) - u(j, i);
                const double v = 0.5 * wz[i] / dy * d * d;
                e.gradient += v;
                e.magnitude += v;
            }
    }
    e.total = e.gradient + e.potential;
    if (!std::isfinite(e.total)) throw NumericalError("energy is not finite");
    return e;
}

double energy_phi(const Field& u, const ReactionModel& model, const WeightedMeasure& m) {
    return energy_parts(u, model, m).total;
}

DissipationMonitor::DissipationMonitor(ReactionModel model, WeightedMeasure m) : model_(std::move(model)), m_(m) {}

void DissipationMonitor::add(const EvolutionState& s) {
    const EnergyParts e = energy_parts(s.u, model_, m_);
    if (report_.phi.empty()) {
        w_ = node_weights(s.u.grid(), m_);
    } else {
        const double dt = s.t - prev_t_;
        if (!(dt > 0.0)) throw ConfigError("dissipation_check: states must have increasing time");
        double q = 0.0;
        for (std::size_t k = 0; k < w_.size(); ++k) {
            const double d = s.u.data()[k] - prev_.data()[k];
            q += w_[k] * d * d;
        }
        report_.dissipated += q / dt;
        const double before = report_.phi.back();
        const double rise = (e.total - before) / std::max(e.magnitude, 1e-300);
        if (rise > report_.worst_increase) report_.worst_increase = rise;
        if (rise > 1e-10 && report_.first_increase < 0) {
            report_.monotone = false;
            report_.first_increase = steps_;
        }
        ++steps_;
    }
    report_.phi.push_back(e.total);
    report_.phi_drop = report_.phi.front() - e.total;
    const double scale = std::max(report_.dissipated, std::abs(report_.phi_drop));
    report_.relative_residual = scale > 0.0 ? std::abs(report_.phi_drop - report_.dissipated) / scale : 0.0;
    prev_ = s.u;
    prev_t_ = s.t;
}

DissipationReport dissipation_check(std::span<const EvolutionState> trace, const ReactionModel& model,
                                    const WeightedMeasure& m) {
    DissipationMonitor mon(model, m);
    for (const auto& s : trace) mon.add(s);
    return mon.report();
}

ComparisonReport comparison_test(const std::vector<Field>& chain, const ReactionModel& model, double frame_speed,
                                 double dt, double horizon) {
    if (chain.empty()) throw ConfigError("comparison_test: empty chain");
    ComparisonReport rep;
    auto check = [&](const std::vector<EvolutionState>& st) {
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < st.size(); ++k)
            for (std::size_t n = 0; n < st[k].u.size(); ++n)
                worst = std::max(worst, st[k].u.data()[n] - st[k + 1].u.data()[n]);
        ++rep.checks;
        rep.worst_violation = std::max(rep.worst_violation, worst);
        if (worst > kOrderTolerance && rep.ordered) {
            rep.ordered = false;
            rep.first_violation_time = st.front().t;
        }
    };
    std::vector<EvolutionState> st;
    for (const auto& u : chain) {
        if (u.size() != chain.front().size()) throw ConfigError("comparison_test: grids do not match");
        st.push_back({0.0, u, frame_speed, 0, 0.0});
    }
    // Initial order is a precondition, not a result.
    for (std::size_t k = 0; k + 1 < st.size(); ++k)
        for (std::size_t n = 0; n < st[k].u.size(); ++n)
            if (st[k].u.data()[n] - st[k + 1].u.data()[n] > kOrderTolerance)
                throw ConfigError("comparison_test: initial data are not ordered");
    const Integrator integ(model, chain.front().grid_ptr(), frame_speed, dt);
    while (st.front().t < horizon - 1e-12) {
        for (auto& s : st) s = integ.step(s);
        check(st);
    }
    return rep;
}

ComparisonReport comparison_test(const Field& low, const Field& high, const ReactionModel& model, double frame_speed,
                                 double dt, double horizon) {
    return comparison_test(std::vector<Field>{low, high}, model, frame_speed, dt, horizon);
}

}  // namespace twave
