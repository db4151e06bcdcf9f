#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "twave/config.hpp"
#include "twave/experiments.hpp"

using namespace twave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("twave_unit_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config gets the documented defaults") {
    const auto cfg = parse_config("[scenario]\nname = wave\n");
    CHECK(cfg.scenario == Scenario::Wave);
    CHECK(cfg.grid.n_y == 1);
    CHECK(cfg.grid.n_z == 401);
    CHECK(cfg.grid.z_min == -20.0);
    CHECK(cfg.model.name == "cubic");
    CHECK(cfg.model.a == 0.25);
    CHECK(cfg.run.dt == 0.05);
    CHECK(cfg.run.horizon == 60.0);
    CHECK(cfg.initial.family == "front");
    const std::string ref = config_reference();
    CHECK(ref.find("grid.n_z (401)") != std::string::npos);
    CHECK(ref.find("run.dt (0.05)") != std::string::npos);
}

TEST_CASE("parse_config reads every section") {
    const auto cfg = parse_config(
        "# comment\n[grid]\nn_y = 5\ny_max = 3 ; trailing\nbc_left = dirichlet\nbc_right = dirichlet\n"
        "[model]\nname = tristable\nk = 4\n[initial]\nfamily = plateau_noise\nnoise = 0.01\n"
        "[run]\nseed = 99\ndt = 0.02\n[scenario]\nname = secondary_speed\n");
    CHECK(cfg.grid.n_y == 5);
    CHECK(cfg.grid.y_max == 3.0);
    CHECK(cfg.grid.bc_left == BoundaryKind::Dirichlet);
    CHECK(cfg.model.name == "tristable");
    CHECK(cfg.model.k == 4.0);
    CHECK(cfg.initial.noise == 0.01);
    CHECK(cfg.run.seed == 99);
    CHECK(cfg.scenario == Scenario::SecondarySpeed);
    CHECK(cfg.echo.size() == 11);
}

TEST_CASE("duplicate key names the key and both lines") {
    try {
        parse_config("[run]\ndt = 0.01\n\ndt = 0.02\n");
        FAIL("expected an error");
    } catch (const ConfigParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("run.dt") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("line 4") != std::string::npos);
        CHECK(e.line() == 4);
    }
}

TEST_CASE("dt above dt_max cites the bound") {
    // Cubic a = 1/4: max |f_u| on [0, 1] is 0.75, so dt_max = 2/3.
    try {
        parse_config("[run]\ndt = 0.9\n");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("dt_max") != std::string::npos);
        CHECK(msg.find("0.666") != std::string::npos);
    }
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_WITH_AS(parse_config("[grid]\nn_q = 3\n"), doctest::Contains("line 2"), ConfigParseError);
    CHECK_THROWS_WITH_AS(parse_config("[grid]\nn_z = 4x\n"), doctest::Contains("expected an integer"), ConfigParseError);
    CHECK_THROWS_WITH_AS(parse_config("[physics]\n"), doctest::Contains("unknown section"), ConfigParseError);
    CHECK_THROWS_WITH_AS(parse_config("n_z = 4\n"), doctest::Contains("outside of any section"), ConfigParseError);
    CHECK_THROWS_WITH_AS(parse_config("[grid\n"), doctest::Contains("unterminated"), ConfigParseError);
    CHECK_THROWS_WITH_AS(parse_config("[scenario]\nname = spiral\n"), doctest::Contains("unknown scenario"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[run]\nhorizon = 0\n"), doctest::Contains("horizon"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("[model]\nname = quartic\n"), doctest::Contains("unknown model"), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\nz_min = nan\n"), ConfigParseError);
}

TEST_CASE("unknown scenario fails before any compute") {
    const auto dir = scratch("bad_scenario");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.ini") << "[scenario]\nname = spiral\n";
    CHECK_THROWS_WITH_AS(load_config((dir / "bad.ini").string()), doctest::Contains("spiral"), ConfigError);
    CHECK_THROWS_AS(load_config((dir / "missing.ini").string()), ConfigError);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("build_initial is reproducible and bounded") {
    const auto cfg = parse_config("[initial]\nfamily = plateau_noise\nnoise = 0.2\noffset = 3\n[run]\nseed = 4\n");
    const auto g = build_grid(cfg.grid);
    const Field a = build_initial(cfg, g), b = build_initial(cfg, g);
    CHECK(a.data() == b.data());
    for (double x : a.data()) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    auto other = cfg;
    other.run.seed = 5;
    CHECK(build_initial(other, g).data() != a.data());
}

TEST_CASE("sandwich pair brackets u0 and the wave translates") {
    const auto cfg = parse_config("[initial]\noffset = 2\n");
    const auto g = build_grid(cfg.grid);
    const Field u0 = build_initial(cfg, g);
    const Field ubar = front_seed(g, CrossSectionField(g, 1.0), 0.0, 1.4);
    const auto [low, high] = sandwich_pair(u0, ubar, 5.0);
    for (std::size_t k = 0; k < u0.size(); ++k) {
        CHECK(low.data()[k] <= u0.data()[k]);
        CHECK(u0.data()[k] <= high.data()[k]);
    }
}

TEST_CASE("wave scenario writes a complete, deterministic manifest") {
    const std::string text = "[scenario]\nname = wave\n[grid]\nn_z = 1401\nz_min = -30\nz_max = 40\n";
    const auto cfg = parse_config(text);
    const auto a = scratch("wave_a"), b = scratch("wave_b");
    const auto ma = run_scenario(cfg, a);
    const auto mb = run_scenario(cfg, b);
    CHECK(ma.all_pass());
    REQUIRE(ma.files.size() == 2);
    for (const auto& f : ma.files) {
        CHECK(fs::file_size(a / f.path) == f.bytes);
        CHECK(sha256_file(a / f.path) == f.sha256);
        CHECK(slurp(a / f.path) == slurp(b / f.path));
    }
    const auto j = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(j["scenario"] == "wave");
    CHECK(j["all_pass"] == true);
    CHECK(j["files"].size() == 2);
    CHECK(j["summary"]["c_dag"].get<double>() == doctest::Approx(0.353553).epsilon(1e-3));
}

TEST_CASE("sha256 of a known string") {
    const auto dir = scratch("sha");
    fs::create_directories(dir);
    std::ofstream(dir / "abc.txt", std::ios::binary) << "abc";
    CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("output precision follows the environment") {
    unsetenv("TWAVE_PRECISION");
    CHECK(output_precision() == 17);
    setenv("TWAVE_PRECISION", "9", 1);
    CHECK(output_precision() == 9);
    setenv("TWAVE_PRECISION", "40", 1);
    CHECK_THROWS_AS(output_precision(), ConfigError);
    unsetenv("TWAVE_PRECISION");
}

TEST_CASE("converge_run refuses a front near the window edge") {
    GridConfig gc;
    gc.n_z = 1401;
    gc.z_min = -30.0;
    gc.z_max = 40.0;
    const auto g = build_grid(gc);
    const auto model = cubic_bistable(0.25);
    const WaveSolution ws = solve_wave(model, g, front_seed(g, CrossSectionField(g, 1.0)), 0.2);
    // A front starting at z = 33 sits inside the right 10-unit margin.
    CHECK_THROWS_WITH_AS(converge_run(model, ws, front_seed(g, CrossSectionField(g, 1.0), 33.0, 2.0), 0.05, 1.0),
                         doctest::Contains("window edge"), NumericalError);
}
