#include "twave/weighted.hpp"

#include <algorithm>
#include <cmath>

namespace twave {

namespace {

void guard(const CylinderGrid& g, const WeightedMeasure& m) {
    const double worst = std::max(std::abs(m.c * (g.z_min() - m.z_ref)), std::abs(m.c * (g.z_max() - m.z_ref)));
    if (worst > kMaxWeightExponent)
        throw WeightOverflow("weight exponent out of range: re-reference weight (move z_ref)");
}

}  // namespace

std::vector<double> axial_weights(const CylinderGrid& g, const WeightedMeasure& m) {
    guard(g, m);
    const int nz = g.n_z();
    const double dz = g.dz();
    std::vector<double> w(nz);
    for (int i = 0; i < nz; ++i) w[i] = dz * std::exp(m.c * (g.z(i) - m.z_ref));
    if (g.bc_z_lo() == BoundaryKind::Plateau) {
        if (!(m.c > 0.0)) throw ConfigError("plateau tail needs a positive weight rate");
        w[0] = w[0] / (-std::expm1(-m.c * dz));
    } else {
        w[0] *= 0.5;
    }
    w[nz - 1] *= 0.5;
    return w;
}

std::vector<double> node_weights(const CylinderGrid& g, const WeightedMeasure& m) {
    const auto wz = axial_weights(g, m);
    std::vector<double> w(g.size());
    for (int j = 0; j < g.n_y(); ++j) {
        const double wy = g.y_weight(j);
        for (int i = 0; i < g.n_z(); ++i) w[g.index(j, i)] = wy * wz[i];
    }
    return w;
}

double weighted_inner(const Field& u, const Field& v, const WeightedMeasure& m) {
    if (u.size() != v.size()) throw ConfigError("weighted_inner: grids do not match");
    const auto w = node_weights(u.grid(), m);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * u.data()[k] * v.data()[k];
    return s;
}

double weighted_norm_l2(const Field& u, const WeightedMeasure& m) {
    return std::sqrt(std::max(0.0, weighted_inner(u, u, m)));
}

double weighted_gradient_sq(const Field& u, const WeightedMeasure& m) {
    const auto& g = u.grid();
    guard(g, m);
    const auto wz = axial_weights(g, m);
    const double dz = g.dz();
    double s = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        const double wy = g.y_weight(j);
        for (int i = 0; i + 1 < g.n_z(); ++i) {
            const double d = (u(j, i + 1) - u(j, i)) / dz;
            s += wy * dz * std::exp(m.c * (g.z(i) + 0.5 * dz - m.z_ref)) * d * d;
        }
    }
    if (!g.one_d()) {
        const double dy = g.dy();
        for (int j = 0; j + 1 < g.n_y(); ++j)
            for (int i = 0; i < g.n_z(); ++i) {
                const double d = (u(j + 1, i) - u(j, i)) / dy;
                s += dy * wz[i] * d * d;
            }
    }
    return s;
}

double weighted_norm_h1(const Field& u, const WeightedMeasure& m) {
    const double l2 = weighted_inner(u, u, m);
    return std::sqrt(std::max(0.0, l2 + weighted_gradient_sq(u, m)));
}

double weighted_norm_h2(const Field& u, const WeightedMeasure& m) {
    const auto& g = u.grid();
    const auto w = node_weights(g, m);
    const double dz = g.dz(), dy = g.dy();
    double s = 0.0;
    for (int j = 0; j < g.n_y(); ++j) {
        for (int i = 1; i + 1 < g.n_z(); ++i) {
            const double uzz = (u(j, i + 1) - 2.0 * u(j, i) + u(j, i - 1)) / (dz * dz);
            double acc = uzz * uzz;
            if (!g.one_d() && j > 0 && j + 1 < g.n_y()) {
                const double uyy = (u(j + 1, i) - 2.0 * u(j, i) + u(j - 1, i)) / (dy * dy);
                const double uyz =
                    (u(j + 1, i + 1) - u(j + 1, i - 1) - u(j - 1, i + 1) + u(j - 1, i - 1)) / (4.0 * dy * dz);
                acc += uyy * uyy + 2.0 * uyz * uyz;
            }
            s += w[g.index(j, i)] * acc;
        }
    }
    const double h1 = weighted_norm_h1(u, m);
    return std::sqrt(h1 * h1 + s);
}

MonotoneCubic::MonotoneCubic(std::span<const double> values, double x0, double h, bool flat_left)
    : values_(values.begin(), values.end()), slopes_(values.size(), 0.0), x0_(x0), h_(h) {
    const int n = static_cast<int>(values_.size());
    if (n < 2) return;
    const auto& v = values_;
    std::vector<double> sec(n - 1);
    for (int i = 0; i + 1 < n; ++i) sec[i] = (v[i + 1] - v[i]) / h;
    for (int i = 0; i < n; ++i) {
        double d;
        if (i == 0) {
            d = flat_left ? 0.0 : (n > 2 ? (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h) : sec[0]);
        } else if (i == n - 1) {
            d = n > 2 ? (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h) : sec[n - 2];
        } else if (i >= 2 && i <= n - 3) {
            d = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
        } else {
            d = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        // Hyman filter on interior nodes; end slopes only get the sign/size clamp.
        const double sl = i > 0 ? sec[i - 1] : sec[0];
        const double sr = i < n - 1 ? sec[i] : sec[n - 2];
        if (sl * sr <= 0.0 && i > 0 && i < n - 1) {
            d = 0.0;
        } else {
            const double sgn = sr != 0.0 ? (sr > 0 ? 1.0 : -1.0) : (sl > 0 ? 1.0 : (sl < 0 ? -1.0 : 0.0));
            const double cap = 3.0 * std::min(std::abs(sl), std::abs(sr));
            d = sgn * std::min(std::max(0.0, sgn * d), cap);
        }
        slopes_[i] = d;
    }
}

double MonotoneCubic::operator()(double x) const {
    const int n = static_cast<int>(values_.size());
    const double s = (x - x0_) / h_;
    if (s <= 0.0) return values_.front();
    if (s >= n - 1) return values_.back();
    int k = static_cast<int>(std::floor(s));
    if (k > n - 2) k = n - 2;
    const double t = s - k;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * values_[k] + h10 * h_ * slopes_[k] + h01 * values_[k + 1] + h11 * h_ * slopes_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
    const int n = static_cast<int>(values_.size());
    const double s = (x - x0_) / h_;
    if (s < 0.0 || s > n - 1) return 0.0;
    int k = static_cast<int>(std::floor(s));
    if (k > n - 2) k = n - 2;
    const double t = s - k;
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
    return (d00 * values_[k] + d01 * values_[k + 1]) / h_ + d10 * slopes_[k] + d11 * slopes_[k + 1];
}

namespace {

void check_shift(const CylinderGrid& g, double R) {
    if (!(std::abs(R) < 0.5 * (g.z_max() - g.z_min())))
        throw ConfigError("translation exceeds half the window length");
}

template <typename Eval>
Field map_rows(const Field& u, double R, Eval&& eval) {
    const auto& g = u.grid();
    check_shift(g, R);
    Field out(u.grid_ptr());
    const bool flat_left = g.bc_z_lo() != BoundaryKind::Dirichlet;
    for (int j = 0; j < g.n_y(); ++j) {
        const MonotoneCubic p(u.row(j), g.z_min(), g.dz(), flat_left);
        for (int i = 0; i < g.n_z(); ++i) out(j, i) = eval(p, g.z(i) - R);
    }
    return out;
}

}  // namespace

Field translate(const Field& u, double R) {
    if (R == 0.0) return u;
    return apply_boundary(map_rows(u, R, [](const MonotoneCubic& p, double x) { return p(x); }));
}

Field translate_derivative(const Field& u, double R) {
    return map_rows(u, R, [](const MonotoneCubic& p, double x) { return p.derivative(x); });
}

Field axial_derivative(const Field& u) {
    const auto& g = u.grid();
    Field out(u.grid_ptr());
    for (int j = 0; j < g.n_y(); ++j) {
        const MonotoneCubic p(u.row(j), g.z_min(), g.dz(), true);
        auto r = out.row(j);
        std::copy(p.slopes().begin(), p.slopes().end(), r.begin());
    }
    return out;
}

}  // namespace twave
