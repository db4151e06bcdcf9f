#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "twave/wave_solver.hpp"

namespace twave {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// The linearization J = L_c + f_u(u_bar) is self-adjoint in the W-weighted
// inner product. With D = diag(W) on the free nodes, B = -D^{1/2} J D^{-1/2}
// is symmetric and has the spectrum of the quadratic form H.
struct Symmetrized {
    std::vector<std::size_t> free;
    Eigen::VectorXd sqrt_w;
    SpMat B;
};

Symmetrized symmetrize(const WaveSolution& ws, const ReactionModel& model) {
    const auto& u = ws.u_bar;
    const auto& g = u.grid();
    const auto w = node_weights(g, {ws.c_dag, 0.0});
    Symmetrized s;
    std::vector<int> pos(g.size(), -1);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i)
            if (!g.fixed(j, i)) {
                pos[g.index(j, i)] = static_cast<int>(s.free.size());
                s.free.push_back(g.index(j, i));
            }
    const int n = static_cast<int>(s.free.size());
    s.sqrt_w.resize(n);
    for (int k = 0; k < n; ++k) s.sqrt_w[k] = std::sqrt(w[s.free[k]]);
    const LinearOperator op(u.grid_ptr(), ws.c_dag);
    std::vector<Eigen::Triplet<double>> trip;
    const int nz = g.n_z();
    for (int k = 0; k < n; ++k) {
        const std::size_t idx = s.free[k];
        const int j = static_cast<int>(idx / nz), i = static_cast<int>(idx % nz);
        const auto r = op.row(j, i);
        trip.emplace_back(k, k, -r.center - model.f_u(u(j, i), g.y(j)));
        auto add = [&](std::size_t nb, double v) {
            const int l = pos[nb];
            if (v == 0.0 || l < 0) return;
            // Both halves of the symmetric pair are averaged to remove rounding asymmetry.
            const double b = -0.5 * v * s.sqrt_w[k] / s.sqrt_w[l];
            trip.emplace_back(k, l, b);
            trip.emplace_back(l, k, b);
        };
        if (i > 0) add(idx - 1, r.z_minus);
        if (i + 1 < nz) add(idx + 1, r.z_plus);
        if (j > 0) add(idx - nz, r.y_minus);
        if (j + 1 < g.n_y()) add(idx + nz, r.y_plus);
    }
    s.B.resize(n, n);
    s.B.setFromTriplets(trip.begin(), trip.end());
    s.B.makeCompressed();
    return s;
}

struct Eigenpair {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    int iterations = 0;
};

// Lowest eigenpairs of B (restricted to q-perp when q is non-empty) by
// shift-invert block subspace iteration with Rayleigh-Ritz.
std::vector<Eigenpair> lowest(const SpMat& B, const Eigen::VectorXd& q, double shift, int wanted, double tol,
                              int max_it) {
    const int n = static_cast<int>(B.rows());
    const bool constrained = q.size() > 0;
    const int nn = constrained ? n + 1 : n;
    SpMat A(nn, nn);
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < B.outerSize(); ++k)
            for (SpMat::InnerIterator it(B, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int k = 0; k < n; ++k) trip.emplace_back(k, k, -shift);
        if (constrained)
            for (int k = 0; k < n; ++k) {
                trip.emplace_back(k, n, q[k]);
                trip.emplace_back(n, k, q[k]);
            }
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
    }
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw NumericalError("spectral_gap: shifted operator factorization failed");

    const Eigen::VectorXd qn = constrained ? Eigen::VectorXd(q / q.norm()) : Eigen::VectorXd();
    auto project = [&](Eigen::MatrixXd& X) {
        if (constrained) X -= qn * (qn.transpose() * X);
    };

    const int p = std::min(n, std::max(wanted + 4, 8));
    Eigen::MatrixXd X(n, p);
    // Deterministic start: smooth modes plus a ramp, all non-degenerate.
    for (int c = 0; c < p; ++c)
        for (int k = 0; k < n; ++k) X(k, c) = std::cos((c + 0.5) * M_PI * (k + 0.5) / n) + 1e-3 * (c + 1) * k / n;
    project(X);
    std::vector<Eigenpair> out(wanted);
    for (int it = 1; it <= max_it; ++it) {
        Eigen::MatrixXd Y(n, p);
        for (int c = 0; c < p; ++c) {
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nn);
            rhs.head(n) = X.col(c);
            const Eigen::VectorXd sol = lu.solve(rhs);
            Y.col(c) = sol.head(n);
        }
        project(Y);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
        X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
        project(X);
        const Eigen::MatrixXd BX = B * X;
        Eigen::MatrixXd H = X.transpose() * BX;
        H = 0.5 * (H + H.transpose());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        X = X * es.eigenvectors();
        const Eigen::MatrixXd BXr = BX * es.eigenvectors();
        bool done = true;
        for (int k = 0; k < wanted; ++k) {
            Eigen::VectorXd r = BXr.col(k) - es.eigenvalues()[k] * X.col(k);
            if (constrained) r -= qn * qn.dot(r);
            out[k] = {es.eigenvalues()[k], X.col(k), r.norm(), it};
            if (out[k].residual > tol) done = false;
        }
        if (done) return out;
    }
    std::ostringstream os;
    os << "spectral_gap: subspace iteration did not converge (residual " << out[0].residual << ")";
    throw NumericalError(os.str());
}

}  // namespace

GapResult spectral_gap(const WaveSolution& ws, const ReactionModel& model, double tolerance, int max_iterations) {
    const auto& g = ws.u_bar.grid();
    GapResult res;
    res.scale = max_abs_fu(model, g);
    const Symmetrized s = symmetrize(ws, model);
    const int n = static_cast<int>(s.free.size());
    const Field uz = wave_derivative(ws);
    Eigen::VectorXd q(n);
    for (int k = 0; k < n; ++k) q[k] = s.sqrt_w[k] * uz.data()[s.free[k]];
    const double qnorm = q.norm();
    if (!(qnorm > 0.0)) throw NumericalError("spectral_gap: profile derivative vanishes");

    // Zero-mode consistency: the linearization applied to u_bar_z.
    {
        const Eigen::VectorXd Bq = s.B * q;
        res.zero_mode_residual = Bq.norm() / qnorm;
    }

    const double tol = tolerance * std::max(1.0, res.scale);
    const double shift = -1e-2 * std::max(1.0, res.scale);
    const auto free_pairs = lowest(s.B, Eigen::VectorXd(), shift, 2, tol, max_iterations);
    res.lambda0 = free_pairs[0].value;
    res.lambda1 = free_pairs[1].value;
    res.residual_lambda0 = free_pairs[0].residual;
    res.iterations = free_pairs[0].iterations;
    {
        const Eigen::VectorXd& x = free_pairs[0].vector;
        res.alignment = std::abs(x.dot(q)) / (x.norm() * qnorm);
    }
    const auto con = lowest(s.B, q, shift, 1, tol, max_iterations);
    res.K = con[0].value;
    res.residual_K = con[0].residual;
    res.iterations = std::max(res.iterations, con[0].iterations);
    res.constraint_residual = std::abs(con[0].vector.dot(q)) / (con[0].vector.norm() * qnorm);

    // Eigenvectors back in the original variables, w = D^{-1/2} phi, sign fixed
    // so that w correlates positively with -u_bar_z (a positive bump).
    auto unpack = [&](const Eigen::VectorXd& x) {
        Field f(ws.u_bar.grid_ptr(), 0.0);
        double dot = 0.0;
        for (int k = 0; k < n; ++k) {
            f.data()[s.free[k]] = x[k] / s.sqrt_w[k];
            dot -= x[k] * q[k];
        }
        if (dot < 0.0) f *= -1.0;
        return f;
    };
    res.eigenvector0 = unpack(free_pairs[0].vector);
    res.eigenvectorK = unpack(con[0].vector);
    return res;
}

}  // namespace twave
