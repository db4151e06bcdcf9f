#include "twave/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "twave/evolution.hpp"

namespace twave {

std::vector<double> column_sup(const Field& u) {
    const auto& g = u.grid();
    std::vector<double> s(g.n_z(), -std::numeric_limits<double>::infinity());
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i) s[i] = std::max(s[i], u(j, i));
    return s;
}

namespace {

// A linear phase condition sum_k p_k u_k = target.
struct Phase {
    std::vector<double> p;
    double target = 0.0;
};

Phase weighted_phase(const Field& u_ref, double c) {
    const auto& g = u_ref.grid();
    const auto w = node_weights(g, {c, 0.0});
    const Field d = axial_derivative(u_ref);
    Phase ph;
    ph.p.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        ph.p[k] = w[k] * d.data()[k];
        ph.target += ph.p[k] * u_ref.data()[k];
    }
    return ph;
}

// sup_y u(., 0) = 1/2 sup_y u(., z_min), imposed on the rows that attain the
// sups in u_ref, with linear interpolation between the two nodes around z = 0.
Phase normalization_phase(const Field& u_ref) {
    const auto& g = u_ref.grid();
    const double s = (0.0 - g.z_min()) / g.dz();
    int i0 = std::clamp(static_cast<int>(std::floor(s)), 0, g.n_z() - 2);
    const double t = s - i0;
    int j_top = 0, j_mid = 0;
    for (int j = 0; j < g.n_y(); ++j) {
        if (u_ref(j, 0) > u_ref(j_top, 0)) j_top = j;
        if ((1 - t) * u_ref(j, i0) + t * u_ref(j, i0 + 1) > (1 - t) * u_ref(j_mid, i0) + t * u_ref(j_mid, i0 + 1))
            j_mid = j;
    }
    Phase ph;
    ph.p.assign(g.size(), 0.0);
    ph.p[g.index(j_mid, i0)] += 1.0 - t;
    ph.p[g.index(j_mid, i0 + 1)] += t;
    ph.p[g.index(j_top, 0)] -= 0.5;
    return ph;
}

Field wave_residual_field(const ReactionModel& model, const Field& u, double c) {
    const auto& g = u.grid();
    Field r = LinearOperator(u.grid_ptr(), c).apply(u);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i)
            r(j, i) = g.fixed(j, i) ? 0.0 : r(j, i) + model.f(u(j, i), g.y(j));
    return r;
}

double phase_value(const Phase& ph, const Field& u) {
    double s = -ph.target;
    for (std::size_t k = 0; k < ph.p.size(); ++k) s += ph.p[k] * u.data()[k];
    return s;
}

// Damped Newton on {wave equation, phase condition} for (u, c).
int newton_wave(const ReactionModel& model, Field& u, double& c, const Phase& ph, double tol, int max_it,
                double& residual) {
    const auto& g = u.grid();
    std::vector<int> pos(g.size(), -1);
    std::vector<std::size_t> free;
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i)
            if (!g.fixed(j, i)) {
                pos[g.index(j, i)] = static_cast<int>(free.size());
                free.push_back(g.index(j, i));
            }
    const int n = static_cast<int>(free.size());
    const double phase_scale = [&] {
        double s = 0.0;
        for (double p : ph.p) s = std::max(s, std::abs(p));
        return s > 0.0 ? 1.0 / s : 1.0;
    }();

    auto merit = [&](const Field& uu, double cc) {
        const Field r = wave_residual_field(model, uu, cc);
        return std::max(r.max_abs(), std::abs(phase_value(ph, uu)) * phase_scale);
    };

    double m = merit(u, c);
    int it = 0;
    for (; it < max_it && m > tol; ++it) {
        if (c < 0.0 && g.bc_z_lo() == BoundaryKind::Plateau) throw SpeedNotPositive("Newton step drove the speed negative");
        const LinearOperator op(u.grid_ptr(), c);
        const Field dc = op.apply_dc(u);
        const Field r = wave_residual_field(model, u, c);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * 7);
        const int nz = g.n_z();
        Eigen::VectorXd rhs(n + 1);
        for (int k = 0; k < n; ++k) {
            const std::size_t idx = free[k];
            const int j = static_cast<int>(idx / nz), i = static_cast<int>(idx % nz);
            const auto row = op.row(j, i);
            trip.emplace_back(k, k, row.center + model.f_u(u(j, i), g.y(j)));
            auto add = [&](std::size_t nb, double v) {
                if (v != 0.0 && pos[nb] >= 0) trip.emplace_back(k, pos[nb], v);
            };
            if (i > 0) add(idx - 1, row.z_minus);
            if (i + 1 < nz) add(idx + 1, row.z_plus);
            if (j > 0) add(idx - nz, row.y_minus);
            if (j + 1 < g.n_y()) add(idx + nz, row.y_plus);
            trip.emplace_back(k, n, dc.data()[idx]);
            rhs[k] = -r.data()[idx];
        }
        for (int k = 0; k < n; ++k)
            if (ph.p[free[k]] != 0.0) trip.emplace_back(n, k, ph.p[free[k]] * phase_scale);
        rhs[n] = -phase_value(ph, u) * phase_scale;
        Eigen::SparseMatrix<double> J(n + 1, n + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw NumericalError("wave Newton: singular Jacobian");
        const Eigen::VectorXd dx = lu.solve(rhs);
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 25; ++ls) {
            Field trial = u;
            for (int k = 0; k < n; ++k) trial.data()[free[k]] += lambda * dx[k];
            const double ct = c + lambda * dx[n];
            const double mt = merit(trial, ct);
            if (std::isfinite(mt) && mt < m) {
                u = std::move(trial);
                c = ct;
                m = mt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    residual = wave_residual_field(model, u, c).max_abs();
    if (!(m <= tol)) {
        std::ostringstream os;
        os << "wave Newton did not converge (merit " << m << " after " << it << " iterations)";
        throw NumericalError(os.str());
    }
    return it;
}

}  // namespace

double front_position(const Field& u) {
    const auto& g = u.grid();
    const auto s = column_sup(u);
    const double top = *std::max_element(s.begin(), s.end());
    if (!(top > 1e-3)) throw NumericalError("front collapsed to the zero state");
    const double half = 0.5 * s.front();
    for (int i = 0; i + 1 < g.n_z(); ++i)
        if (s[i] >= half && s[i + 1] < half) return g.z(i) + g.dz() * (s[i] - half) / (s[i] - s[i + 1]);
    throw NumericalError("no half-level crossing: the front left the window");
}

Field front_seed(const GridPtr& grid, const CrossSectionField& plateau, double offset, double width) {
    const auto& g = *grid;
    Field u(grid);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i) u(j, i) = plateau[j] * 0.5 * (1.0 - std::tanh((g.z(i) - offset) / width));
    return apply_boundary(u);
}

double wave_residual(const ReactionModel& model, const Field& u, double c) {
    return wave_residual_field(model, u, c).max_abs();
}

Field wave_derivative(const WaveSolution& ws) { return axial_derivative(ws.u_bar); }

WaveSolution solve_wave(const ReactionModel& model, const GridPtr& grid, const Field& seed, double c_seed,
                        const WaveOptions& opt) {
    const auto& g = *grid;
    if (g.z_min() > -10.0 || g.z_max() < 10.0) throw ConfigError("solve_wave needs a window covering [-10, 10]");
    if (!(c_seed > 0.0)) throw ConfigError("solve_wave needs a positive speed seed");
    {
        const auto s = column_sup(seed);
        if (!(s.front() > 0.1 && s.back() < 0.5 * s.front()))
            throw ConfigError("seed is not front-like (high on the left, low on the right)");
    }
    const double dt = opt.dt > 0.0 ? opt.dt : std::min(0.25, dt_max(model, g));

    // Freezing phase.
    double c = c_seed;
    double kappa = opt.kappa;
    EvolutionState st{0.0, apply_boundary(seed), c, 0, 0.0};
    double x0 = front_position(st.u);
    double prev_vel = 0.0;
    double vel = std::numeric_limits<double>::infinity();
    while (st.t < opt.max_freeze_time) {
        const Integrator integ(model, grid, c, dt);
        st = integ.advance(st, st.t + opt.measure_interval);
        const double x1 = front_position(st.u);
        vel = (x1 - x0) / opt.measure_interval;
        if (prev_vel * vel < 0.0) kappa *= 0.5;
        prev_vel = vel;
        c += kappa * vel;
        if (!(c > 0.0)) throw SpeedNotPositive("freezing phase: frame speed is not positive");
        x0 = x1;
        const int cells = static_cast<int>(std::lround(-x1 / g.dz()));
        if (std::abs(cells) >= 2) {
            st.u = shift_cells(st.u, cells);
            st.window_shift += cells;
            x0 = front_position(st.u);
        }
        if (std::abs(vel) < opt.freeze_tolerance) break;
    }
    if (!(std::abs(vel) < opt.freeze_tolerance)) {
        std::ostringstream os;
        os << "freezing phase did not settle (front velocity " << vel << " at t = " << st.t << ")";
        throw NumericalError(os.str());
    }

    WaveSolution ws;
    ws.freeze_time = st.t;
    Field u = st.u;
    double res = 0.0;
    ws.newton_iterations = newton_wave(model, u, c, weighted_phase(u, c), opt.newton_tolerance,
                                       opt.max_newton_iterations, res);

    // Normalization: move the half-level crossing to z = 0, then polish with
    // the normalization itself as the phase condition.
    const double shift = front_position(u);
    if (shift != 0.0) u = translate(u, -shift);
    ws.newton_iterations += newton_wave(model, u, c, normalization_phase(u), opt.newton_tolerance,
                                        opt.max_newton_iterations, res);
    ws.normalization_shift = shift;
    ws.c_dag = c;
    ws.residual = res;
    ws.v_limit = column(u, 0);
    ws.worst_increase = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n_y(); ++j) {
        if (g.y_fixed(j)) continue;
        for (int i = 0; i + 1 < g.n_z(); ++i) ws.worst_increase = std::max(ws.worst_increase, u(j, i + 1) - u(j, i));
    }
    ws.monotone = ws.worst_increase <= 1e-12;
    ws.u_bar = std::move(u);
    return ws;
}

SecondaryResult solve_secondary_speed(const ReactionModel& model, const GridPtr& grid, const CriticalPoint& v,
                                      double c_seed, const WaveOptions& opt) {
    SecondaryResult out;
    out.v = v.v;
    const CriticalPoint top = find_critical_point(model, grid, CrossSectionField(grid, 1.0));
    out.w = top.v;
    double gap = 0.0;
    for (int j = 0; j < grid->n_y(); ++j) gap = std::max(gap, std::abs(top.v[j] - v.v[j]));
    if (gap < 1e-6) {
        out.applicable = false;
        out.note = "not applicable: the plateau is already the maximal equilibrium";
        return out;
    }
    out.applicable = true;
    const ReactionModel shifted = shifted_model(model, v.v);
    CrossSectionField room(grid, 0.0);
    for (int j = 0; j < grid->n_y(); ++j) room[j] = top.v[j] - v.v[j];
    const Field seed = front_seed(grid, room);
    try {
        out.h_bar = solve_wave(shifted, grid, seed, c_seed, opt);
        out.c_dag_v = out.h_bar->c_dag;
        out.note = "secondary wave computed";
    } catch (const SpeedNotPositive&) {
        out.c_dag_v = 0.0;
        out.note = "secondary front does not advance; speed reported as 0";
    }
    return out;
}

TranslationReport translation_bounds(const WaveSolution& ws, double R_max, int samples) {
    if (samples < 3) throw ConfigError("translation_bounds needs at least 3 samples");
    TranslationReport rep;
    const WeightedMeasure m{ws.c_dag, 0.0};
    rep.derivative_norm = weighted_norm_l2(wave_derivative(ws), m);
    double small = std::numeric_limits<double>::infinity();
    rep.C1 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const double R = -R_max + 2.0 * R_max * k / (samples - 1);
        const double d = weighted_norm_l2(translate(ws.u_bar, R) - ws.u_bar, m);
        rep.R.push_back(R);
        rep.distance.push_back(d);
        if (R != 0.0 && std::abs(R) <= 1.0 + 1e-12) {
            rep.C1 = std::min(rep.C1, d / std::abs(R));
            rep.C2 = std::max(rep.C2, d / std::abs(R));
            if (std::abs(R) < small) {
                small = std::abs(R);
                rep.small_R_ratio = d / std::abs(R);
            }
        }
    }
    // Non-decreasing moving away from R = 0 on either side.
    for (std::size_t k = 0; k + 1 < rep.R.size(); ++k) {
        if (rep.R[k + 1] <= 0.0 && rep.distance[k] < rep.distance[k + 1]) rep.monotone = false;
        if (rep.R[k] >= 0.0 && rep.distance[k + 1] < rep.distance[k]) rep.monotone = false;
    }
    return rep;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_wave(const WaveSolution& ws, std::ostream& os) {
    const auto& g = ws.u_bar.grid();
    os << "twave-wave 1\n";
    os << "c_dag " << fmt17(ws.c_dag) << "\n";
    os << "residual " << fmt17(ws.residual) << "\n";
    os << "normalization_shift " << fmt17(ws.normalization_shift) << "\n";
    os << "grid " << g.n_y() << ' ' << g.n_z() << ' ' << fmt17(g.y_min()) << ' ' << fmt17(g.y_max()) << ' '
       << fmt17(g.z_min()) << ' ' << fmt17(g.z_max()) << ' ' << to_string(g.bc_left()) << ' '
       << to_string(g.bc_right()) << ' ' << to_string(g.bc_z_lo()) << ' ' << to_string(g.bc_z_hi()) << "\n";
    os << "values\n";
    for (double v : ws.u_bar.data()) os << fmt17(v) << "\n";
}

WaveSolution load_wave(std::istream& is) {
    auto expect = [&](const std::string& key) {
        std::string k;
        if (!(is >> k) || k != key) throw ConfigError("wave file: expected '" + key + "'");
    };
    auto number = [&] {
        std::string s;
        if (!(is >> s)) throw ConfigError("wave file: truncated");
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) throw ConfigError("wave file: bad number '" + s + "'");
        return v;
    };
    expect("twave-wave");
    expect("1");
    WaveSolution ws;
    expect("c_dag");
    ws.c_dag = number();
    expect("residual");
    ws.residual = number();
    expect("normalization_shift");
    ws.normalization_shift = number();
    expect("grid");
    GridConfig gc;
    if (!(is >> gc.n_y >> gc.n_z)) throw ConfigError("wave file: bad grid sizes");
    gc.y_min = number();
    gc.y_max = number();
    gc.z_min = number();
    gc.z_max = number();
    std::string tags[4];
    for (auto& t : tags)
        if (!(is >> t)) throw ConfigError("wave file: missing boundary tag");
    gc.bc_left = parse_boundary(tags[0]);
    gc.bc_right = parse_boundary(tags[1]);
    gc.bc_z_lo = parse_boundary(tags[2]);
    gc.bc_z_hi = parse_boundary(tags[3]);
    expect("values");
    const GridPtr grid = build_grid(gc);
    std::vector<double> vals(grid->size());
    for (auto& v : vals) v = number();
    ws.u_bar = Field(grid, std::move(vals));
    ws.v_limit = column(ws.u_bar, 0);
    ws.worst_increase = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid->n_y(); ++j) {
        if (grid->y_fixed(j)) continue;
        for (int i = 0; i + 1 < grid->n_z(); ++i)
            ws.worst_increase = std::max(ws.worst_increase, ws.u_bar(j, i + 1) - ws.u_bar(j, i));
    }
    ws.monotone = ws.worst_increase <= 1e-12;
    return ws;
}

}  // namespace twave
