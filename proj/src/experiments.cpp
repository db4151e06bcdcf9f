#include "twave/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <openssl/evp.h>

#include "json.hpp"

#ifndef TWAVE_VERSION
#define TWAVE_VERSION "dev"
#endif

namespace twave {

namespace fs = std::filesystem;

namespace {

// R-tail exponent class: the fitted rate must be within this relative
// distance of sigma.
constexpr double kSameClass = 0.1;

struct Run {
    RunManifest& manifest;
    fs::path dir;
    int precision;

    void summary(const std::string& key, double v) { manifest.summary.emplace_back(key, v); }
    void check(const std::string& name, bool pass, double value, double bound, const std::string& note = {}) {
        manifest.assertions.push_back({name, pass, value, bound, note});
    }
    void record(const std::string& rel) {
        const fs::path p = dir / rel;
        manifest.files.push_back({rel, fs::file_size(p), sha256_file(p)});
    }
    std::ofstream open(const std::string& rel) const {
        std::ofstream os(dir / rel);
        if (!os) throw ConfigError("cannot write '" + (dir / rel).string() + "'");
        os << std::setprecision(precision);
        return os;
    }
};

std::string num(double v, int precision) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

CriticalPoint plateau_of(const ExperimentConfig& cfg, const ReactionModel& model, const GridPtr& g) {
    return find_critical_point(model, g, CrossSectionField(g, cfg.run.plateau_seed));
}

WaveSolution wave_for(const ExperimentConfig& cfg, const ReactionModel& model, const GridPtr& g,
                      const CrossSectionField& v) {
    return solve_wave(model, g, front_seed(g, v), cfg.run.c_seed);
}

// First z, scanning right to left, where sup_y u reaches level.
double crossing_from_right(const Field& u, double level) {
    const auto& g = u.grid();
    const auto s = column_sup(u);
    for (int i = g.n_z() - 1; i > 0; --i)
        if (s[i - 1] >= level && s[i] < level) return g.z(i - 1) + g.dz() * (s[i - 1] - level) / (s[i - 1] - s[i]);
    return 0.0;
}

void write_profile(Run& run, const Field& u, const std::string& rel) {
    auto os = run.open(rel);
    const auto& g = u.grid();
    os << "y,z,u\n";
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_z(); ++i)
            os << num(g.y(j), run.precision) << ',' << num(g.z(i), run.precision) << ','
               << num(u(j, i), run.precision) << '\n';
    os.close();
    run.record(rel);
}

void write_wave(Run& run, const WaveSolution& ws, const std::string& rel) {
    auto os = run.open(rel);
    save_wave(ws, os);
    os.close();
    run.record(rel);
}

bool closed_form_case(const ExperimentConfig& cfg) {
    return cfg.model.name == "cubic" && cfg.grid.n_y == 1;
}

void scenario_wave(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    const CriticalPoint v = plateau_of(cfg, model, g);
    const WaveSolution ws = wave_for(cfg, model, g, v.v);
    run.summary("c_dag", ws.c_dag);
    run.summary("residual", ws.residual);
    run.summary("newton_iterations", ws.newton_iterations);
    run.summary("freeze_time", ws.freeze_time);
    run.summary("normalization_shift", ws.normalization_shift);
    double plateau_dev = 0.0;
    for (int j = 0; j < g->n_y(); ++j) plateau_dev = std::max(plateau_dev, std::abs(ws.v_limit[j] - v.v[j]));
    run.summary("plateau_deviation", plateau_dev);
    write_wave(run, ws, "wave.txt");
    write_profile(run, ws.u_bar, "profile.csv");
    run.check("wave_residual", ws.residual <= 1e-8, ws.residual, 1e-8);
    run.check("profile_monotone", ws.monotone, ws.worst_increase, 1e-12);
    if (closed_form_case(cfg)) {
        const double exact = (1.0 - 2.0 * cfg.model.a) / std::sqrt(2.0);
        const double err = std::abs(ws.c_dag - exact);
        const double perr = cubic_profile_error(ws.u_bar);
        run.summary("c_exact", exact);
        run.summary("profile_error", perr);
        run.check("speed_closed_form", err <= 1e-3, err, 1e-3);
        run.check("profile_closed_form", perr <= 1e-3, perr, 1e-3);
    }
}

void scenario_converge(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    const CriticalPoint v = plateau_of(cfg, model, g);
    const WaveSolution ws = wave_for(cfg, model, g, v.v);
    write_wave(run, ws, "wave.txt");
    const Field u0 = build_initial(cfg, g);
    const double shortfall = plateau_shortfall(u0, ws.v_limit);
    run.check("initial_left_plateau", shortfall >= -cfg.initial.alpha, shortfall, -cfg.initial.alpha,
              "min (u0 - v) at z_min");
    const ConvergeOutcome r = converge_run(model, ws, u0, cfg.run.dt, cfg.run.horizon, cfg.run.delta);
    write_trace_csv(r.trace, run.dir / "trace.csv", run.precision);
    run.record("trace.csv");

    run.summary("c_dag", ws.c_dag);
    run.summary("sigma", r.decay.sigma);
    run.summary("sigma_quality", r.decay.quality);
    run.summary("fit_t_lo", r.decay.t_lo);
    run.summary("fit_t_hi", r.decay.t_hi);
    run.summary("R_infinity", r.R_tail.R_infinity);
    run.summary("R_tail_rate", r.R_tail.rate);
    run.summary("R_tail_quality", r.R_tail.quality);
    run.summary("h2_rate", -r.h2_fit.slope);
    run.summary("h2_quality", r.h2_fit.quality);
    run.summary("envelope_b", r.envelope.b);
    run.summary("envelope_intercept", r.envelope.intercept);
    run.summary("dissipation_residual", r.dissipation.relative_residual);
    run.summary("phi_worst_increase", r.dissipation.worst_increase);
    run.summary("worst_ortho_ratio", r.worst_ortho_ratio);
    run.summary("max_clip", r.max_clip);

    run.check("sigma_positive", r.decay.sigma > 0.0, r.decay.sigma, 0.0);
    run.check("sigma_fit_quality", r.decay.quality >= 0.99, r.decay.quality, 0.99);
    const double class_gap = std::abs(r.R_tail.rate / r.decay.sigma - 1.0);
    run.check("R_tail_exponent_class", class_gap <= kSameClass, class_gap, kSameClass, "|rate / sigma - 1|");
    run.check("R_tail_quality", r.R_tail.quality >= 0.95, r.R_tail.quality, 0.95);
    run.check("h2_decay_rate", r.h2_fit.slope < 0.0, -r.h2_fit.slope, 0.0);
    run.check("h2_log_linear_quality", r.h2_fit.quality >= 0.99, r.h2_fit.quality, 0.99);
    run.check("phi_monotone", r.dissipation.monotone, r.dissipation.worst_increase, 1e-10);
    run.check("orthogonality", r.worst_ortho_ratio <= 1.0, r.worst_ortho_ratio, 1.0, "residual / tolerance");
    run.check("z_delta_retreat", r.envelope.b > 0.0, r.envelope.b, 0.0);
}

void scenario_gap(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    const CriticalPoint v = plateau_of(cfg, model, g);
    const WaveSolution ws = wave_for(cfg, model, g, v.v);
    const GapResult gap = spectral_gap(ws, model);
    GridConfig fine_cfg = cfg.grid;
    fine_cfg.n_z = 2 * (cfg.grid.n_z - 1) + 1;
    const GridPtr fine = build_grid(fine_cfg);
    const WaveSolution ws_fine = wave_for(cfg, model, fine, plateau_of(cfg, model, fine).v);
    const GapResult gap_fine = spectral_gap(ws_fine, model);
    const double drift = std::abs(gap_fine.K - gap.K) / std::abs(gap.K);

    run.summary("c_dag", ws.c_dag);
    run.summary("lambda0", gap.lambda0);
    run.summary("lambda1", gap.lambda1);
    run.summary("K", gap.K);
    run.summary("K_refined", gap_fine.K);
    run.summary("alignment", gap.alignment);
    run.summary("zero_mode_residual", gap.zero_mode_residual);
    run.summary("scale", gap.scale);
    write_profile(run, gap.eigenvectorK, "eigenvector_K.csv");

    run.check("lambda0_small", std::abs(gap.lambda0) <= 1e-6 * gap.scale, std::abs(gap.lambda0), 1e-6 * gap.scale);
    run.check("zero_mode_alignment", gap.alignment >= 0.999, gap.alignment, 0.999);
    run.check("K_positive", gap.K > 0.0, gap.K, 0.0);
    run.check("K_refinement_stable", drift <= 0.05, drift, 0.05, "relative change under dz -> dz/2");
}

void scenario_secondary(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    const CriticalPoint v = plateau_of(cfg, model, g);
    double vmax = 0.0;
    for (int j = 0; j < g->n_y(); ++j) vmax = std::max(vmax, v.v[j]);
    run.summary("v_max", vmax);
    run.summary("v_energy", v.energy);
    run.summary("v_hessian_floor", v.hessian_floor);
    const WaveSolution ws = wave_for(cfg, model, g, v.v);
    run.summary("c_dag", ws.c_dag);
    write_wave(run, ws, "wave.txt");
    const SecondaryResult s = solve_secondary_speed(model, g, v, cfg.run.c_seed);
    run.manifest.notes.push_back(s.note);
    if (!s.applicable || v.trivial || !(vmax < 1.0)) {
        run.manifest.notes.push_back("secondary speed criterion waived: no nontrivial plateau below the maximal "
                                     "equilibrium on this geometry");
        run.check("secondary_speed_below_primary", true, 0.0, 0.0, "not applicable (waived)");
        return;
    }
    run.summary("c_dag_v", s.c_dag_v);
    run.summary("margin", ws.c_dag - s.c_dag_v);
    if (s.h_bar) write_wave(run, *s.h_bar, "secondary_wave.txt");
    run.check("secondary_speed_below_primary", s.c_dag_v < ws.c_dag, s.c_dag_v, ws.c_dag, "c_dag_v < c_dag");
}

void scenario_comparison(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    std::mt19937_64 rng(cfg.run.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    int violations = 0;
    {
        auto os = run.open("pairs.csv");
        os << "pair,ordered,worst_violation,first_violation_time\n";
        for (int p = 0; p < cfg.run.pairs; ++p) {
            const double offset = -5.0 + 10.0 * unit(rng), width = 0.5 + 2.5 * unit(rng);
            const double amp = 0.6 + 0.4 * unit(rng), gap = 0.2 * unit(rng);
            Field high = front_seed(g, CrossSectionField(g, amp), offset, width);
            for (auto& x : high.data()) x = std::clamp(x + 0.05 * unit(rng), 0.0, 1.0);
            high = apply_boundary(high);
            Field low = high;
            for (auto& x : low.data()) x = std::max(x - gap * unit(rng), 0.0);
            const ComparisonReport rep = comparison_test(low, high, model, 0.0, cfg.run.dt, cfg.run.pair_horizon);
            worst = std::max(worst, rep.worst_violation);
            if (!rep.ordered) ++violations;
            os << p << ',' << (rep.ordered ? 1 : 0) << ',' << num(rep.worst_violation, run.precision) << ','
               << num(rep.first_violation_time, run.precision) << '\n';
        }
    }
    run.record("pairs.csv");
    run.summary("pairs", cfg.run.pairs);
    run.summary("pair_violations", violations);
    run.summary("pair_worst_violation", worst);
    run.check("random_pairs_ordered", violations == 0, worst, kOrderTolerance);

    const CriticalPoint v = plateau_of(cfg, model, g);
    const WaveSolution ws = wave_for(cfg, model, g, v.v);
    const Field u0 = build_initial(cfg, g);
    const auto [low, high] = sandwich_pair(u0, ws.u_bar, cfg.initial.sandwich_shift);
    const ComparisonReport rep = comparison_test({low, u0, high}, model, ws.c_dag, cfg.run.dt, cfg.run.horizon);
    run.summary("sandwich_worst_violation", rep.worst_violation);
    run.summary("sandwich_checks", rep.checks);
    run.check("sandwich_ordered", rep.ordered, rep.worst_violation, kOrderTolerance);
}

void scenario_hypotheses(const ExperimentConfig& cfg, Run& run) {
    const GridPtr g = build_grid(cfg.grid);
    const ReactionModel model = build_model(cfg.model, cfg.grid);
    const HypothesisReport h = check_hypotheses(model, *g);
    run.summary("worst_f0", h.worst_f0);
    run.summary("worst_f1", h.worst_f1);
    run.summary("holder_quotient_f", h.holder_quotient_f);
    run.summary("holder_quotient_fu", h.holder_quotient_fu);
    const EigenResult nu0 = eigen_nu(model, g, CrossSectionField(g, 0.0));
    run.summary("nu0", nu0.value);
    const H3Report h3 = check_H3(model, g, cfg.run.c_seed);
    run.summary("h3_discriminant", h3.discriminant);
    run.summary("h3_best_phi", h3.best_phi);
    run.check("H1_endpoints", h.h1, std::max(h.worst_f0, h.worst_f1), 0.0);
    run.check("unbalanced", h.integral_positive, h.integral.empty() ? 0.0 : *std::min_element(h.integral.begin(), h.integral.end()), 0.0);
    run.check("nondegenerate", h.nondegenerate, 0.0, 0.0);
    run.check("H3_discriminant", h3.discriminant_positive, h3.discriminant, 0.0);
    run.check("H3_phi_nonpositive", h3.phi_nonpositive, h3.best_phi, 0.0);
}

void write_manifest(const RunManifest& m, const fs::path& dir) {
    nlohmann::ordered_json j;
    j["scenario"] = m.scenario;
    j["version"] = m.version;
    auto& c = j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.config) c[k] = v;
    j["wall_time_s"] = m.wall_time;
    auto& s = j["summary"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.summary) s[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(num(v, 17));
    auto& a = j["assertions"] = nlohmann::ordered_json::array();
    for (const auto& x : m.assertions)
        a.push_back({{"name", x.name}, {"pass", x.pass}, {"value", x.value}, {"bound", x.bound}, {"note", x.note}});
    j["all_pass"] = m.all_pass();
    auto& f = j["files"] = nlohmann::ordered_json::array();
    for (const auto& x : m.files) f.push_back({{"path", x.path}, {"bytes", x.bytes}, {"sha256", x.sha256}});
    j["notes"] = m.notes;
    if (!m.error.empty()) j["error"] = m.error;
    std::ofstream os(dir / "manifest.json");
    os << j.dump(2) << '\n';
}

}  // namespace

bool RunManifest::all_pass() const {
    if (!error.empty() || assertions.empty()) return false;
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    return os.str();
}

int output_precision() {
    const char* env = std::getenv("TWAVE_PRECISION");
    if (!env || !*env) return 17;
    char* end = nullptr;
    const long p = std::strtol(env, &end, 10);
    if (*end != '\0' || p < 1 || p > 17) throw ConfigError("TWAVE_PRECISION must be an integer in 1..17");
    return static_cast<int>(p);
}

void write_trace_csv(const FrontTrace& trace, const fs::path& path, int precision) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << "t,R,m,phi,dRdt_fd,dRdt_quotient,h2c_norm,z_delta\n";
    for (const auto& s : trace.samples)
        os << num(s.t, precision) << ',' << num(s.R, precision) << ',' << num(s.m, precision) << ','
           << num(s.phi, precision) << ',' << num(s.dRdt_fd, precision) << ',' << num(s.dRdt_quotient, precision)
           << ',' << num(s.h2c_norm, precision) << ',' << num(s.z_delta, precision) << '\n';
}

std::pair<Field, Field> sandwich_pair(const Field& u0, const Field& u_bar, double R) {
    const Field behind = translate(u_bar, -R), ahead = translate(u_bar, R);
    Field low = u0, high = u0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        low.data()[k] = std::min(u0.data()[k], behind.data()[k]);
        high.data()[k] = std::max(u0.data()[k], ahead.data()[k]);
    }
    return {apply_boundary(low), apply_boundary(high)};
}

double cubic_profile_error(const Field& u_bar) {
    const auto& g = u_bar.grid();
    auto err = [&](double s) {
        double e = 0.0;
        for (int j = 0; j < g.n_y(); ++j) {
            if (g.y_fixed(j)) continue;
            for (int i = 0; i < g.n_z(); ++i)
                e = std::max(e, std::abs(u_bar(j, i) - 1.0 / (1.0 + std::exp((g.z(i) - s) / std::sqrt(2.0)))));
        }
        return e;
    };
    return boost::math::tools::brent_find_minima(err, -2.0, 2.0, 40).second;
}

double plateau_shortfall(const Field& u0, const CrossSectionField& v) {
    const auto& g = u0.grid();
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.n_y(); ++j)
        if (!g.y_fixed(j)) m = std::min(m, u0(j, 0) - v[j]);
    return m;
}

ConvergeOutcome converge_run(const ReactionModel& model, const WaveSolution& wave, const Field& u0, double dt,
                             double horizon, double delta) {
    constexpr double kEdgeMargin = 10.0;
    ConvergeOutcome out;
    out.wave = wave;
    const double c = wave.c_dag;
    const WeightedMeasure m{c, 0.0};
    const Integrator integ(model, wave.u_bar.grid_ptr(), c, dt);
    FrontTracker tracker(wave, model, delta);
    DissipationMonitor monitor(model, m);
    EvolutionState st{0.0, u0, c, 0, 0.0};
    double top = 0.0;
    for (int j = 0; j < wave.v_limit.size(); ++j) top = std::max(top, wave.v_limit[j]);
    tracker.start(st, crossing_from_right(u0, 0.5 * top));
    monitor.add(st);
    const auto ratio = [](const TraceSample& s) {
        return s.ortho_tolerance > 0.0 ? s.ortho_residual / s.ortho_tolerance : (s.ortho_residual > 0.0 ? HUGE_VAL : 0.0);
    };
    out.worst_ortho_ratio = ratio(tracker.trace().samples.back());
    while (st.t < horizon - 1e-9 * dt) {
        st = integ.step(st);
        out.max_clip = std::max(out.max_clip, st.clipped);
        tracker.observe(st);
        monitor.add(st);
        out.worst_ortho_ratio = std::max(out.worst_ortho_ratio, ratio(tracker.trace().samples.back()));
        // Re-windowing would rescale every weighted quantity mid-run, so a front near the edge is fatal.
        const double R = tracker.trace().samples.back().R;
        const auto& g = wave.u_bar.grid();
        if (R < g.z_min() + kEdgeMargin || R > g.z_max() - kEdgeMargin) {
            std::ostringstream os;
            os << "front at R = " << R << " (t = " << st.t << ") is within " << kEdgeMargin
               << " of the window edge; widen grid.z_min / grid.z_max";
            throw NumericalError(os.str());
        }
    }
    out.trace = tracker.trace();
    out.dissipation = monitor.report();

    const double scale = std::pow(weighted_norm_l2(wave.u_bar, m), 2);
    out.decay = fit_decay(out.trace, scale);
    out.R_tail = fit_R_tail(out.trace, 0.5 * (out.decay.t_lo + out.decay.t_hi), out.decay.t_hi);
    std::vector<double> t, h, tz, z;
    for (const auto& s : out.trace.samples) {
        if (s.t >= out.decay.t_lo && s.t <= out.decay.t_hi) {
            t.push_back(s.t);
            h.push_back(s.h2c_norm);
        }
        tz.push_back(s.t);
        z.push_back(s.z_delta);
    }
    out.h2_fit = fit_log_linear(t, h);
    out.envelope = fit_envelope(tz, z);
    out.trace.sigma_fit = out.decay.sigma;
    out.trace.R_infinity = out.R_tail.R_infinity;
    out.trace.fit_t_lo = out.decay.t_lo;
    out.trace.fit_t_hi = out.decay.t_hi;
    return out;
}

RunManifest run_scenario(const ExperimentConfig& config, const fs::path& out_dir) {
    RunManifest manifest;
    manifest.scenario = std::string(to_string(config.scenario));
    manifest.version = TWAVE_VERSION;
    manifest.config = config.echo;
    fs::create_directories(out_dir);
    Run run{manifest, out_dir, output_precision()};
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
        manifest.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(manifest, out_dir);
    };
    try {
        switch (config.scenario) {
            case Scenario::Wave: scenario_wave(config, run); break;
            case Scenario::Converge: scenario_converge(config, run); break;
            case Scenario::Gap: scenario_gap(config, run); break;
            case Scenario::SecondarySpeed: scenario_secondary(config, run); break;
            case Scenario::Comparison: scenario_comparison(config, run); break;
            case Scenario::Hypotheses: scenario_hypotheses(config, run); break;
        }
    } catch (const ConfigError& e) {
        manifest.error = e.what();
        finish();
        throw ConfigError(manifest.scenario + ": " + e.what());
    } catch (const std::exception& e) {
        manifest.error = e.what();
        finish();
        throw NumericalError(manifest.scenario + ": " + e.what());
    }
    finish();
    return manifest;
}

}  // namespace twave
