// opinion_lab: scenario-driven front end.
//
//   opinion_lab simulate <config>
//   opinion_lab counterexample [--p P] [--c0 C] [--n N] [--t-end T] [--delta D] [--rhs-times t,...]
//   opinion_lab picard-check <config>
//   opinion_lab report <run-dir>
//
// Exit codes: 0 all checks pass, 2 a check failed, 1 runtime or configuration error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "opinion_lab/config.hpp"
#include "opinion_lab/io.hpp"
#include "opinion_lab/parallel.hpp"
#include "opinion_lab/scenario.hpp"

namespace ol = opinion_lab;

namespace {

struct GlobalFlags {
    std::string config;
    std::string output;
    std::size_t threads = 0;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> checks;
};

struct CounterexampleFlags {
    std::optional<double> p;
    std::optional<double> c0;
    std::optional<std::size_t> n;
    std::optional<double> t_end;
    std::optional<double> delta;
    std::vector<double> rhs_times;
};

ol::ConfigOverrides overrides_from(const GlobalFlags& g) {
    ol::ConfigOverrides o;
    o.rng_seed = g.seed;
    if (!g.output.empty()) o.output_dir = g.output;
    for (const auto& c : g.checks) o.checks.push_back(ol::parse_check_override(c));
    return o;
}

ol::ScenarioConfig counterexample_config(const GlobalFlags& g, const CounterexampleFlags& f) {
    const auto overrides = overrides_from(g);
    ol::ScenarioConfig cfg;
    if (!g.config.empty()) {
        cfg = ol::load_config(g.config, overrides, false);
    } else {
        cfg.name = "counterexample";
        cfg.checks = overrides.checks;
        if (overrides.rng_seed) cfg.rng_seed = *overrides.rng_seed;
        cfg.output_dir = overrides.output_dir.value_or(std::filesystem::path("runs") / "counterexample");
    }
    auto section = cfg.counterexample.value_or(ol::CounterexampleSection{});
    if (f.p) section.params.v_exponent = *f.p;
    if (f.c0) section.params.c0 = *f.c0;
    if (f.n) section.options.n_interval = *f.n;
    if (f.t_end) section.options.t_end = *f.t_end;
    if (f.delta) section.options.exclusion_radius = *f.delta;
    if (!f.rhs_times.empty()) section.options.rhs_times = f.rhs_times;
    cfg.counterexample = section;
    try {
        ol::require_writable_dir(cfg.output_dir);
    } catch (const std::runtime_error& e) {
        throw ol::ConfigError({std::string("output_dir: ") + e.what()});
    }
    return cfg;
}

int finish(const ol::RunReport& report, const std::filesystem::path& dir) {
    if (!report.error.empty()) std::cerr << "error: " << report.error << "\n";
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  measured " << c.worst_violation
                  << (c.bound == "at_most" ? " <= " : " >= ") << c.tolerance << "\n";
    }
    for (const auto& s : report.skipped) std::cout << "skipped " << s << " (belongs to another subcommand)\n";
    std::cout << (report.error.empty() ? "artifacts in " : "partial artifacts in ") << dir.string() << "\n";
    return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuum opinion dynamics: simulation, diagnostics and verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ol::library_version());

    GlobalFlags g;
    app.add_option("--config", g.config, "Scenario file (alternative to the positional argument)");
    app.add_option("--output", g.output, "Output directory, replaces output_dir from the file");
    app.add_option("--threads", g.threads, "Worker threads; falls back to OPINION_LAB_THREADS, then all cores");
    app.add_option("--seed-override", g.seed, "Replaces rng_seed from the file");
    app.add_option("--check", g.checks, "Enable a check or replace its tolerance, as name=tolerance (repeatable)")
        ->take_all();

    std::string positional;
    auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and evaluate its checks");
    simulate->add_option("config", positional, "Scenario file");
    auto* picard = app.add_subcommand("picard-check", "Picard windows and RK4 cross-validation");
    picard->add_option("config", positional, "Scenario file");

    CounterexampleFlags cf;
    auto* counter = app.add_subcommand("counterexample", "Closed-form cycling construction and its checks");
    counter->add_option("--p", cf.p, "Velocity decay exponent, in (2/3, 1)");
    counter->add_option("--c0", cf.c0, "Initial cluster offset, > 8");
    counter->add_option("--n", cf.n, "Interval population resolution");
    counter->add_option("--t-end", cf.t_end, "Horizon");
    counter->add_option("--delta", cf.delta, "Fold exclusion radius for the rhs check");
    counter->add_option("--rhs-times", cf.rhs_times, "Times of the rhs check")->delimiter(',');

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Print the summary table of a run directory");
    report->add_option("run-dir", run_dir, "Directory holding report.json")->required();

    for (auto* sub : {simulate, picard, counter, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ol::kExitPass : ol::kExitRuntimeError;
    }

    if (*report) return ol::print_run_report(run_dir, std::cout);

    try {
        ol::RunOptions options;
        options.threads = g.threads > 0 ? g.threads : ol::default_thread_count();
        if (*counter) {
            const auto cfg = counterexample_config(g, cf);
            return finish(ol::run_counterexample(cfg, options), cfg.output_dir);
        }

        const std::string path = positional.empty() ? g.config : positional;
        if (path.empty()) {
            std::cerr << "error: a scenario file is required\n";
            return ol::kExitRuntimeError;
        }
        const auto cfg = ol::load_config(path, overrides_from(g));
        return finish(*simulate ? ol::run_scenario(cfg, options) : ol::run_picard_check(cfg, options), cfg.output_dir);
    } catch (const ol::ConfigError& e) {
        for (const auto& msg : e.errors()) std::cerr << msg << "\n";
        return ol::kExitRuntimeError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ol::kExitRuntimeError;
    }
}
