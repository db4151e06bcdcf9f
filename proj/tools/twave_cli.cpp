// Command-line front end: one verb per experiment.
#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "twave/experiments.hpp"

namespace fs = std::filesystem;
using namespace twave;

namespace {

enum Exit { kOk = 0, kAssertionFailed = 1, kConfigFailure = 2, kNumericalFailure = 3 };

struct Job {
    std::string config;
    fs::path out;
    int code = kOk;
    std::string message;
};

void run_job(Job& job, Scenario verb) {
    try {
        ExperimentConfig cfg = load_config(job.config);
        const bool named = std::any_of(cfg.echo.begin(), cfg.echo.end(),
                                       [](const auto& kv) { return kv.first == "scenario.name"; });
        if (named && cfg.scenario != verb)
            throw ConfigError(job.config + ": scenario.name is '" + std::string(to_string(cfg.scenario)) +
                              "' but the verb asks for '" + std::string(to_string(verb)) + "'");
        cfg.scenario = verb;
        const RunManifest m = run_scenario(cfg, job.out);
        std::ostringstream os;
        for (const auto& a : m.assertions)
            os << (a.pass ? "PASS " : "FAIL ") << a.name << " value=" << a.value << " bound=" << a.bound
               << (a.note.empty() ? "" : " (" + a.note + ")") << "\n";
        for (const auto& n : m.notes) os << "note: " << n << "\n";
        os << "manifest: " << (job.out / "manifest.json").string() << "\n";
        job.message = os.str();
        job.code = m.all_pass() ? kOk : kAssertionFailed;
    } catch (const ConfigError& e) {
        job.code = kConfigFailure;
        job.message = std::string("config error: ") + e.what() + "\n";
    } catch (const std::exception& e) {
        job.code = kNumericalFailure;
        job.message = std::string("error: ") + e.what() + "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traveling waves of reaction-diffusion equations in truncated cylinders"};
    app.footer(config_reference() +
               "\nExit status: 0 all assertions pass, 1 an assertion failed, 2 config error, 3 numerical error.\n"
               "TWAVE_PRECISION sets the significant digits of CSV output (default 17).");
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out = "out";
    unsigned jobs = 1;
    const std::pair<const char*, Scenario> verbs[] = {
        {"wave", Scenario::Wave},
        {"converge", Scenario::Converge},
        {"gap", Scenario::Gap},
        {"secondary-speed", Scenario::SecondarySpeed},
        {"compare", Scenario::Comparison},
        {"check-hypotheses", Scenario::Hypotheses},
    };
    Scenario chosen = Scenario::Wave;
    for (const auto& [name, scenario] : verbs) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + std::string(to_string(scenario)) + " scenario");
        sub->add_option("--config", configs, "config file (several with --jobs)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--jobs", jobs, "run several configs concurrently, each into <out>/<config stem>")
            ->check(CLI::PositiveNumber);
        sub->callback([&chosen, s = scenario] { chosen = s; });
    }
    CLI11_PARSE(app, argc, argv);

    std::vector<Job> work;
    const bool sweep = configs.size() > 1 || jobs > 1;
    for (const auto& c : configs) work.push_back({c, sweep ? fs::path(out) / fs::path(c).stem() : fs::path(out), kOk, {}});
    if (sweep) {
        for (std::size_t a = 0; a < work.size(); ++a)
            for (std::size_t b = a + 1; b < work.size(); ++b)
                if (work[a].out == work[b].out) {
                    std::cerr << "config error: " << work[a].config << " and " << work[b].config
                              << " share the output directory " << work[a].out << "\n";
                    return kConfigFailure;
                }
    }

    std::atomic<std::size_t> next{0};
    std::mutex print;
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            run_job(work[k], chosen);
            const std::lock_guard<std::mutex> lock(print);
            if (sweep) std::cout << "== " << work[k].config << "\n";
            std::cout << work[k].message << std::flush;
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(work.size()));
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kOk;
    for (const auto& j : work) code = std::max(code, j.code);
    return code;
}
