#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "opinion_lab/config.hpp"
#include "opinion_lab/io.hpp"
#include "opinion_lab/scenario.hpp"

using namespace opinion_lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "opinion_lab_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::vector<std::string> errors_of(const std::string& yaml) {
    try {
        (void)parse_config(yaml, "test.yaml", {}, false);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

const char* kMinimalHk = R"(
name: minimal
n: 200
kernel: {family: hk, radius: 0.2}
initial_profile: {kind: uniform}
integrator: {t_end: 30}
)";

}  // namespace

TEST_CASE("minimal config gets defaults") {
    const auto cfg = parse_config(kMinimalHk, "minimal.yaml", {}, false);
    CHECK(cfg.name == "minimal");
    CHECK(cfg.n == 200);
    CHECK(cfg.kernel_family == "hegselmann_krause");
    CHECK(cfg.confidence_radius == 0.2);
    CHECK(cfg.integrator.method == Method::Rk4);
    CHECK(cfg.integrator.t_end == 30.0);
    CHECK(cfg.integrator.dt == 0.01);
    CHECK(cfg.integrator.clamp_to_box);
    CHECK(cfg.rng_seed == 1);
    CHECK(cfg.checks.empty());
    CHECK(cfg.output_dir == fs::path("runs") / "minimal");
}

TEST_CASE("config validation") {
    SUBCASE("negative radius") {
        const auto errs = errors_of("n: 10\nkernel: {family: hk, radius: -0.1}\nintegrator: {t_end: 1}\n");
        CHECK(any_contains(errs, "radius must be positive"));
    }
    SUBCASE("unknown check lists the known ones") {
        const auto errs = errors_of(std::string(kMinimalHk) + "diagnostics: {moment_monotone_k7: 1e-6}\n");
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].find("moment_monotone_k7") != std::string::npos);
        CHECK(errs[0].find("moment_monotone_k6") != std::string::npos);
        CHECK(errs[0].find("picard_contraction") != std::string::npos);
    }
    SUBCASE("every error is reported, with positions") {
        const auto errs = errors_of("n: 1\nkernel: {family: nonsense}\nintegrator: {t_end: -2, colour: red}\n");
        CHECK(errs.size() >= 3);
        CHECK(any_contains(errs, "n must be at least 2"));
        CHECK(any_contains(errs, "unknown kernel family 'nonsense'"));
        CHECK(any_contains(errs, "colour"));
        CHECK(any_contains(errs, "test.yaml:1:"));
    }
    SUBCASE("parse error carries line and column") {
        const auto errs = errors_of("n: 10\nkernel: {family: hk\n");
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].rfind("test.yaml:", 0) == 0);
    }
    SUBCASE("checks that need particular kernels") {
        const auto errs = errors_of(
            "n: 10\nkernel: {family: gaussian, sigma: 1}\nintegrator: {t_end: 1}\n"
            "diagnostics: {cluster_separation: 0}\n");
        CHECK(any_contains(errs, "cluster_separation"));
        const auto hk = errors_of(std::string(kMinimalHk) + "diagnostics: {order_rate_bound: 0.05}\n");
        CHECK(any_contains(hk, "order_rate_bound"));
        const auto picard = errors_of(std::string(kMinimalHk) + "picard: {t_end: 1}\n");
        CHECK(any_contains(picard, "Lipschitz"));
    }
    SUBCASE("step-size guard and profile range") {
        CHECK(any_contains(errors_of("n: 10\nkernel: {family: constant, value: 4}\nintegrator: {t_end: 1, dt: 0.5}\n"),
                           "step-size guard"));
        CHECK_FALSE(errors_of("n: 10\nkernel: {family: zero}\ninitial_profile: {kind: constant, value: 1.5}\n"
                              "integrator: {t_end: 1}\n")
                        .empty());
    }
    SUBCASE("unwritable output directory") {
        ConfigOverrides o;
        o.output_dir = "/etc/hostname/sub";
        CHECK_THROWS_WITH_AS(parse_config(kMinimalHk, "x.yaml", o), doctest::Contains("output_dir"), ConfigError);
    }
}

TEST_CASE("overrides") {
    ConfigOverrides o;
    o.rng_seed = 99;
    o.checks.push_back(parse_check_override("box_invariant=1e-3"));
    const auto cfg = parse_config(std::string(kMinimalHk) + "diagnostics: {box_invariant: 1e-9, mean_conserved:}\n",
                                  "x.yaml", o, false);
    CHECK(cfg.rng_seed == 99);
    REQUIRE(cfg.checks.size() == 2);
    CHECK(cfg.checks[0].tolerance == 1e-3);
    CHECK(cfg.checks[1].tolerance == 1e-8);
    CHECK_THROWS_AS(parse_check_override("no_such_check=1"), ConfigError);
    CHECK_THROWS_AS(parse_check_override("box_invariant"), ConfigError);
    CHECK_THROWS_AS(parse_check_override("box_invariant=abc"), ConfigError);
}

TEST_CASE("every bundled scenario loads") {
    for (const auto& entry : fs::directory_iterator(fs::path(OPINION_LAB_SOURCE_DIR) / "scenarios")) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW((void)load_config(entry.path(), {}, false));
    }
}

TEST_CASE("every check reference appears in the traceability table") {
    std::ifstream in(fs::path(OPINION_LAB_SOURCE_DIR) / "docs" / "checks.md");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto doc = buf.str();
    for (const auto& c : known_checks()) {
        CAPTURE(c.name);
        CHECK(doc.find("`" + std::string(c.name) + "`") != std::string::npos);
        CHECK(doc.find("`" + std::string(c.reference) + "`") != std::string::npos);
    }
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0, 5e-324}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("csv layout") {
    const Ensemble e({0.25, 0.75}, {0.1, 0.9}, {0.5, 0.5});
    Trajectory traj;
    traj.snapshots = {e, e.with_opinions({0.2, 0.8}, 1.0)};
    const auto csv = trajectory_csv(traj);
    CHECK(csv.rfind("t,agent_index,opinion\n0,0.25,0.1\n0,0.75,0.9\n1,0.25,0.2\n", 0) == 0);
    const auto summary = summary_csv({SummaryRow{}});
    CHECK(summary.rfind("t,m1,m2,m3,m4,m5,m6,dissipation,w1_to_final,max_velocity\n", 0) == 0);
}

TEST_CASE("artifacts appear only on commit") {
    const auto dir = scratch("writer");
    ArtifactWriter w(dir);
    w.write("a.txt", "hello");
    CHECK(fs::exists(dir / "a.txt.partial"));
    CHECK_FALSE(fs::exists(dir / "a.txt"));
    w.commit();
    CHECK(fs::exists(dir / "a.txt"));
    CHECK_FALSE(fs::exists(dir / "a.txt.partial"));
    CHECK_THROWS(ArtifactWriter("/etc/hostname/sub"));
}

TEST_CASE("run_scenario exit codes") {
    SUBCASE("zero kernel passes and never moves") {
        const auto dir = scratch("zero");
        ConfigOverrides o;
        o.output_dir = dir;
        const auto cfg = parse_config(
            "name: z\nn: 20\nkernel: {family: zero}\nintegrator: {t_end: 2, dt: 0.5}\n"
            "diagnostics: {w1_converged: 0, box_invariant:}\n",
            "z.yaml", o);
        const auto report = run_scenario(cfg);
        CHECK(report.exit_code() == kExitPass);
        CHECK(fs::exists(dir / "trajectory.csv"));
        CHECK(fs::exists(dir / "run_meta.json"));
        std::ifstream in(dir / "summary.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) CHECK(line.find(",0,0") != std::string::npos);  // w1_to_final, max_velocity

        const auto j = nlohmann::json::parse(read_text_file(dir / "report.json"));
        CHECK(j["pass"] == true);
        CHECK(j["checks"].size() == 2);
        const auto meta = nlohmann::json::parse(read_text_file(dir / "run_meta.json"));
        CHECK(meta["version"] == library_version());
        CHECK(meta["rng_seed"] == 1);
    }
    SUBCASE("a failing check gives exit 2") {
        ConfigOverrides o;
        o.output_dir = scratch("fail");
        const auto cfg = parse_config(
            "name: f\nn: 20\nkernel: {family: constant, value: 1}\nintegrator: {t_end: 1}\n"
            "diagnostics: {steady_state: 0}\n",
            "f.yaml", o);
        const auto report = run_scenario(cfg);
        CHECK(report.exit_code() == kExitCheckFailed);
        CHECK_FALSE(report.pass());
    }
    SUBCASE("a NaN-producing kernel gives exit 1 and partial artifacts") {
        const auto dir = scratch("nan");
        ConfigOverrides o;
        o.output_dir = dir;
        const auto cfg = parse_config(
            "name: n\nn: 10\nkernel: {family: expression, rule: 'log(t - 0.5)', weight_bound: 1}\n"
            "integrator: {t_end: 1}\n",
            "n.yaml", o);
        const auto report = run_scenario(cfg);
        CHECK(report.exit_code() == kExitRuntimeError);
        CHECK(report.error.find("non-finite") != std::string::npos);
        CHECK(fs::exists(dir / "report.json.partial"));
        CHECK_FALSE(fs::exists(dir / "report.json"));
        std::ostringstream table;
        CHECK(print_run_report(dir, table) == kExitRuntimeError);
        CHECK(table.str().find("[partial]") != std::string::npos);
    }
    SUBCASE("checks of another kind are skipped") {
        ConfigOverrides o;
        o.output_dir = scratch("skip");
        const auto cfg = parse_config(
            "name: s\nn: 10\nkernel: {family: gaussian, sigma: 1}\nintegrator: {t_end: 0.5}\n"
            "picard: {t_end: 0.2}\ndiagnostics: {picard_contraction:, mean_conserved:}\n",
            "s.yaml", o);
        const auto sim = run_scenario(cfg);
        CHECK(sim.skipped == std::vector<std::string>{"picard_contraction"});
        CHECK(sim.checks.size() == 1);
        const auto pic = run_picard_check(cfg);
        CHECK(pic.skipped == std::vector<std::string>{"mean_conserved"});
        CHECK(pic.exit_code() == kExitPass);
    }
}

TEST_CASE("report table") {
    const auto dir = scratch("table");
    ConfigOverrides o;
    o.output_dir = dir;
    const auto cfg = parse_config("name: t\nn: 10\nkernel: {family: zero}\nintegrator: {t_end: 1}\n", "t.yaml", o);
    (void)run_scenario(cfg);
    std::ostringstream out;
    CHECK(print_run_report(dir, out) == kExitPass);
    CHECK(out.str().find("\nbox_invariant   PASS") != std::string::npos);
    CHECK(out.str().find("overall: PASS") != std::string::npos);
    std::ostringstream missing;
    CHECK(print_run_report(scratch("empty"), missing) == kExitRuntimeError);
}
