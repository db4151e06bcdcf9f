#include "twave/front_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace twave {

namespace {

struct Hermite {
    long double p = 0, dp = 0, ddp = 0;
};

Hermite hermite(std::span<const double> v, const std::vector<double>& d, double x0, double h, long double x) {
    const int n = static_cast<int>(v.size());
    const long double s = (x - x0) / h;
    if (s <= 0) return {v.front(), 0, 0};
    if (s >= n - 1) return {v.back(), 0, 0};
    int k = static_cast<int>(std::floor(s));
    if (k > n - 2) k = n - 2;
    const long double t = s - k, t2 = t * t, t3 = t2 * t;
    const long double a = v[k], b = v[k + 1], da = d[k], db = d[k + 1];
    Hermite r;
    r.p = (2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + t) * h * da + (-2 * t3 + 3 * t2) * b + (t3 - t2) * h * db;
    r.dp = ((6 * t2 - 6 * t) * a + (-6 * t2 + 6 * t) * b) / h + (3 * t2 - 4 * t + 1) * da + (3 * t2 - 2 * t) * db;
    r.ddp = ((12 * t - 6) * a + (6 - 12 * t) * b) / (static_cast<long double>(h) * h) +
            ((6 * t - 4) * da + (6 * t - 2) * db) / h;
    return r;
}

void check_range(const CylinderGrid& g, long double R) {
    if (!(std::fabs(R) < 0.5L * (g.z_max() - g.z_min())))
        throw NumericalError("front tracking: translation left the admissible range");
}

}  // namespace

FrontLocator::FrontLocator(const WaveSolution& ws) : ws_(ws), c_(ws.c_dag) {
    const auto& g = ws_.u_bar.grid();
    w_ = node_weights(g, {c_, 0.0});
    const bool flat_left = g.bc_z_lo() != BoundaryKind::Dirichlet;
    long double nrm = 0;
    for (int j = 0; j < g.n_y(); ++j) {
        const MonotoneCubic p(ws_.u_bar.row(j), g.z_min(), g.dz(), flat_left);
        slopes_.push_back(p.slopes());
        for (int i = 0; i < g.n_z(); ++i) nrm += w_[g.index(j, i)] * p.slopes()[i] * p.slopes()[i];
    }
    uz_norm_ = static_cast<double>(std::sqrt(nrm));
}

FrontLocator::Sums FrontLocator::sums(const Field& u, long double R) const {
    const auto& g = ws_.u_bar.grid();
    if (u.size() != g.size()) throw ConfigError("front tracking: field and wave live on different grids");
    check_range(g, R);
    Sums s;
    for (int j = 0; j < g.n_y(); ++j) {
        const auto row = ws_.u_bar.row(j);
        for (int i = 0; i < g.n_z(); ++i) {
            if (g.fixed(j, i)) continue;
            const Hermite p = hermite(row, slopes_[j], g.z_min(), g.dz(), static_cast<long double>(g.z(i)) - R);
            const long double w = w_[g.index(j, i)];
            const long double e = u(j, i) - p.p;
            s.m += w * e * e;
            s.hp += w * e * p.dp;
            s.hpp += w * (p.dp * p.dp - e * p.ddp);
        }
    }
    return s;
}

double FrontLocator::h_value(const Field& u, double R) const { return static_cast<double>(0.5L * sums(u, R).m); }

HDerivatives FrontLocator::h_derivatives(const Field& u, double R) const {
    const auto& g = ws_.u_bar.grid();
    const Sums s = sums(u, R);
    HDerivatives d;
    d.h_p = static_cast<double>(s.hp);
    d.h_pp = static_cast<double>(s.hpp);
    // Integrated-by-parts form with a centered difference for u_z.
    long double acc = 0;
    for (int j = 0; j < g.n_y(); ++j) {
        const auto row = ws_.u_bar.row(j);
        for (int i = 0; i < g.n_z(); ++i) {
            if (g.fixed(j, i)) continue;
            double uz;
            if (i == 0)
                uz = g.bc_z_lo() == BoundaryKind::Dirichlet ? (u(j, 1) - u(j, 0)) / g.dz() : 0.0;
            else if (i + 1 == g.n_z())
                uz = (u(j, i) - u(j, i - 1)) / g.dz();
            else
                uz = (u(j, i + 1) - u(j, i - 1)) / (2.0 * g.dz());
            const Hermite p = hermite(row, slopes_[j], g.z_min(), g.dz(), static_cast<long double>(g.z(i)) - R);
            acc += w_[g.index(j, i)] * uz * p.dp;
        }
    }
    d.h_pp_ibp = static_cast<double>(c_ * s.hp + acc);
    return d;
}

FrontState FrontLocator::locate(const Field& u, long double R_seed) const {
    const auto& g = ws_.u_bar.grid();
    long double unorm = 0;
    for (std::size_t k = 0; k < u.size(); ++k) unorm += w_[k] * u.data()[k] * u.data()[k];
    const long double scale = std::sqrt(unorm) * uz_norm_;
    const long double eps = std::numeric_limits<long double>::epsilon();

    long double R = R_seed;
    long double lo = -INFINITY, hi = INFINITY;
    Sums s = sums(u, R);
    int it = 0;
    for (; it < 200; ++it) {
        const long double target = std::min(1e-12L * scale, 1e-9L * std::sqrt(s.m) * uz_norm_);
        if (std::fabs(s.hp) <= target) break;
        if (s.hp > 0)
            hi = std::min(hi, R);
        else
            lo = std::max(lo, R);
        const bool bracketed = std::isfinite(lo) && std::isfinite(hi);
        long double next;
        if (s.hpp > 0) {
            next = R - s.hp / s.hpp;
            if (bracketed && !(next > lo && next < hi)) next = 0.5L * (lo + hi);
            if (!bracketed) next = std::clamp(next, R - 1.0L, R + 1.0L);
        } else {
            next = bracketed ? 0.5L * (lo + hi) : R + (s.hp > 0 ? -0.5L : 0.5L);
        }
        const long double half = 0.5L * (g.z_max() - g.z_min());
        next = std::clamp(next, -0.999L * half, 0.999L * half);
        if (std::fabs(next - R) <= 4 * eps * (1 + std::fabs(R))) {
            R = next;
            s = sums(u, R);
            break;
        }
        R = next;
        s = sums(u, R);
    }
    FrontState fs;
    fs.R = static_cast<double>(R);
    fs.R_precise = R;
    fs.m = static_cast<double>(s.m);
    fs.h_p = static_cast<double>(s.hp);
    fs.h_pp = static_cast<double>(s.hpp);
    fs.ortho_residual = std::fabs(fs.h_p);
    fs.ortho_tolerance = 1e-8 * std::sqrt(fs.m) * uz_norm_;
    fs.iterations = it;
    // Convexity regime: h'' must dominate a fixed share of |T_R u_bar_z|^2.
    const double uzR = uz_norm_ * std::exp(0.5 * c_ * fs.R);
    if (!(fs.h_pp > 0.1 * uzR * uzR)) {
        std::ostringstream os;
        os << "locate_front: outside the convexity regime (h'' = " << fs.h_pp << " at R = " << fs.R << ")";
        throw NumericalError(os.str());
    }
    return fs;
}

double FrontLocator::z_delta(const Field& u, double R, double delta) const {
    const auto& g = u.grid();
    const Field tr = translate(ws_.u_bar, R);
    for (int i = g.n_z() - 1; i >= 0; --i)
        for (int j = 0; j < g.n_y(); ++j)
            if (std::abs(u(j, i) - tr(j, i)) > delta) return g.z(i);
    return kNoMismatch;
}

double h_value(const Field& u, const WaveSolution& ws, double R) { return FrontLocator(ws).h_value(u, R); }

HDerivatives h_derivatives(const Field& u, const WaveSolution& ws, double R) {
    return FrontLocator(ws).h_derivatives(u, R);
}

FrontState locate_front(const Field& u, const WaveSolution& ws, double R_seed) {
    return FrontLocator(ws).locate(u, R_seed);
}

double z_delta(const Field& u, const WaveSolution& ws, double R, double delta) {
    return FrontLocator(ws).z_delta(u, R, delta);
}

LogLinearFit fit_log_linear(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size() || t.size() < 2) throw NumericalError("log-linear fit needs matching samples");
    const auto n = static_cast<double>(t.size());
    double st = 0, sl = 0;
    std::vector<double> ly(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
        if (!(y[k] > 0.0)) throw NumericalError("log-linear fit: non-positive value in window");
        ly[k] = std::log(y[k]);
        st += t[k];
        sl += ly[k];
    }
    const double tm = st / n, lm = sl / n;
    double stt = 0, stl = 0, sll = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        stt += (t[k] - tm) * (t[k] - tm);
        stl += (t[k] - tm) * (ly[k] - lm);
        sll += (ly[k] - lm) * (ly[k] - lm);
    }
    LogLinearFit f;
    f.slope = stl / stt;
    f.intercept = lm - f.slope * tm;
    double sse = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double r = ly[k] - (f.intercept + f.slope * t[k]);
        sse += r * r;
    }
    f.quality = sll > 0 ? 1.0 - sse / sll : 1.0;
    f.t_lo = t.front();
    f.t_hi = t.back();
    f.samples = static_cast<int>(t.size());
    return f;
}

DecayFit fit_decay(const FrontTrace& trace, double scale) {
    const auto& s = trace.samples;
    if (s.empty()) throw NumericalError("fit_decay: empty trace");
    const double m0 = s.front().m;
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * scale;
    std::vector<double> t, m;
    std::size_t k = 0;
    while (k < s.size() && !(s[k].m < 0.1 * m0)) ++k;
    for (; k < s.size() && s[k].m > floor; ++k) {
        t.push_back(s[k].t);
        m.push_back(s[k].m);
    }
    if (t.size() < 20) {
        std::ostringstream os;
        os << "fit_decay: only " << t.size() << " samples in the decay window";
        throw NumericalError(os.str());
    }
    const LogLinearFit f = fit_log_linear(t, m);
    return {-0.5 * f.slope, f.quality, f.t_lo, f.t_hi, f.samples};
}

RTailFit fit_R_tail(const FrontTrace& trace, double t_lo, double t_hi) {
    const auto& s = trace.samples;
    std::vector<const TraceSample*> win;
    for (const auto& x : s)
        if (x.t >= t_lo && x.t <= t_hi && x.t > s.front().t) win.push_back(&x);
    if (win.size() < 20) throw NumericalError("fit_R_tail: fewer than 20 samples in the window");
    std::vector<double> t, d;
    for (const auto* x : win) {
        t.push_back(x->t);
        d.push_back(std::abs(x->dRdt_fd));
    }
    const LogLinearFit fd = fit_log_linear(t, d);
    RTailFit out;
    out.derivative_rate = -fd.slope;
    if (!(out.derivative_rate > 0.0)) throw NumericalError("fit_R_tail: dR/dt does not decay");
    const TraceSample& last = *win.back();
    out.R_infinity = last.R + last.dRdt_fd / out.derivative_rate;
    const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(out.R_infinity));
    t.clear();
    d.clear();
    for (const auto* x : win) {
        const double e = std::abs(x->R - out.R_infinity);
        if (!(e > floor)) break;
        t.push_back(x->t);
        d.push_back(e);
    }
    if (t.size() < 20) throw NumericalError("fit_R_tail: fewer than 20 samples above the rounding floor");
    const LogLinearFit f = fit_log_linear(t, d);
    out.rate = -f.slope;
    out.quality = f.quality;
    out.samples = f.samples;
    return out;
}

EnvelopeFit fit_envelope(const std::vector<double>& t, const std::vector<double>& z) {
    std::vector<double> tt, zz;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::isfinite(z[k])) {
            tt.push_back(t[k]);
            zz.push_back(z[k]);
        }
    if (tt.size() < 2) throw NumericalError("fit_envelope: fewer than two finite samples");
    const auto n = static_cast<double>(tt.size());
    double tm = 0, zm = 0;
    for (std::size_t k = 0; k < tt.size(); ++k) {
        tm += tt[k] / n;
        zm += zz[k] / n;
    }
    double stt = 0, stz = 0;
    for (std::size_t k = 0; k < tt.size(); ++k) {
        stt += (tt[k] - tm) * (tt[k] - tm);
        stz += (tt[k] - tm) * (zz[k] - zm);
    }
    if (!(stt > 0)) throw NumericalError("fit_envelope: samples at a single time");
    EnvelopeFit e;
    e.b = -stz / stt;
    e.intercept = -INFINITY;
    for (std::size_t k = 0; k < tt.size(); ++k) e.intercept = std::max(e.intercept, zz[k] + e.b * tt[k]);
    e.finite_samples = static_cast<int>(tt.size());
    return e;
}

FrontTracker::FrontTracker(const WaveSolution& ws, const ReactionModel& model, double delta)
    : loc_(ws), model_(model), m_{ws.c_dag, 0.0}, delta_(delta) {}

TraceSample FrontTracker::sample(const EvolutionState& s, const FrontState& fs) const {
    TraceSample x;
    x.t = s.t;
    x.R = fs.R;
    x.m = fs.m;
    x.h_pp = fs.h_pp;
    x.ortho_residual = fs.ortho_residual;
    x.ortho_tolerance = fs.ortho_tolerance;
    x.phi = energy_phi(s.u, model_, m_);
    x.h2c_norm = weighted_norm_h2(s.u - translate(loc_.wave().u_bar, fs.R), m_);
    x.z_delta = loc_.z_delta(s.u, fs.R, delta_);
    return x;
}

void FrontTracker::start(const EvolutionState& state, double R_seed) {
    const FrontState fs = loc_.locate(state.u, R_seed);
    R_prev_ = fs.R_precise;
    trace_ = {};
    trace_.samples.push_back(sample(state, fs));
    prev_ = state;
    started_ = true;
}

void FrontTracker::observe(const EvolutionState& state) {
    if (!started_) throw ConfigError("FrontTracker: start() must precede observe()");
    const double dt = state.t - prev_.t;
    if (!(dt > 0.0)) throw ConfigError("FrontTracker: samples must increase in t");
    const FrontState fs = loc_.locate(state.u, R_prev_);
    R_prev_ = fs.R_precise;
    TraceSample x = sample(state, fs);
    x.dRdt_fd = (fs.R - trace_.samples.back().R) / dt;
    // Implicit differentiation of h'(u(t), R(t)) = 0.
    const Field ut = (1.0 / dt) * (state.u - prev_.u);
    const auto& g = state.u.grid();
    const Field uz = translate_derivative(loc_.wave().u_bar, fs.R);
    long double num = 0;
    const auto w = node_weights(g, m_);
    for (std::size_t k = 0; k < g.size(); ++k) num += w[k] * ut.data()[k] * uz.data()[k];
    x.dRdt_quotient = static_cast<double>(-num / fs.h_pp);
    trace_.samples.push_back(x);
    prev_ = state;
}

}  // namespace twave
