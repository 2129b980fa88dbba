#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "opinion_lab/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;  // stdout and stderr
};

Outcome run(const std::string& args) {
    const std::string cmd = std::string(OPINION_LAB_CLI) + " " + args + " 2>&1";
    Outcome r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) r.output += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "opinion_lab_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir.parent_path());
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const auto path = fs::temp_directory_path() / "opinion_lab_cli" / (name + ".yaml");
    fs::create_directories(path.parent_path());
    std::ofstream(path) << text;
    return path;
}

std::string scenario(const std::string& name) {
    return (fs::path(OPINION_LAB_SOURCE_DIR) / "scenarios" / (name + ".yaml")).string();
}

const char* kRandomHk = R"(name: random_hk
n: 120
rng_seed: 5
kernel: {family: hk, radius: 0.15}
initial_profile: {kind: random_piecewise, pieces: 6}
integrator: {dt: 0.05, t_end: 5}
diagnostics: {box_invariant:, mean_conserved:}
)";

}  // namespace

TEST_CASE("cli: usage errors") {
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("--help").code == 0);
    CHECK(run("simulate").code == 1);
    CHECK(run("simulate /nonexistent/file.yaml").code == 1);
}

TEST_CASE("cli: configuration errors exit 1 with the full list") {
    const auto bad_radius =
        write_config("bad_radius", "n: 10\nkernel: {family: hk, radius: -0.1}\nintegrator: {t_end: 1}\n");
    const auto r = run("simulate " + bad_radius.string());
    CHECK(r.code == 1);
    CHECK(r.output.find("radius must be positive") != std::string::npos);

    const auto unknown = write_config("unknown_check", "n: 10\nkernel: {family: zero}\nintegrator: {t_end: 1}\n"
                                                       "diagnostics: {moment_monotone_k7: 1e-6}\n");
    const auto u = run("simulate " + unknown.string());
    CHECK(u.code == 1);
    CHECK(u.output.find("known checks") != std::string::npos);

    const auto o = run("--check nonsense=1 simulate " + scenario("zero"));
    CHECK(o.code == 1);
}

TEST_CASE("cli: unwritable output directory") {
    const auto r = run("--output /etc/hostname/sub simulate " + scenario("zero"));
    CHECK(r.code == 1);
    CHECK(r.output.find("output_dir") != std::string::npos);
    CHECK(run("--output /etc/hostname/sub counterexample --n 100 --t-end 2").code == 1);
}

TEST_CASE("cli: NaN-producing kernel exits 1 and leaves partial artifacts") {
    const auto cfg = write_config("nan", "name: nan\nn: 10\n"
                                         "kernel: {family: expression, rule: 'sqrt(xa - xb)', weight_bound: 1}\n"
                                         "integrator: {t_end: 1}\n");
    const auto dir = scratch("nan");
    const auto r = run("--output " + dir.string() + " simulate " + cfg.string());
    CHECK(r.code == 1);
    CHECK(fs::exists(dir / "report.json.partial"));
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
    CHECK(run("report " + dir.string()).code == 1);
}

TEST_CASE("cli: exit codes of the bundled scenarios") {
    const auto zero = scratch("zero");
    CHECK(run("--output " + zero.string() + " simulate " + scenario("zero")).code == 0);
    const auto table = run("report " + zero.string());
    CHECK(table.code == 0);
    CHECK(table.output.find("w1_converged") != std::string::npos);

    const auto blocks = scratch("three_block");
    CHECK(run("--output " + blocks.string() + " simulate " + scenario("three_block")).code == 2);
    CHECK(run("report " + blocks.string()).code == 2);

    CHECK(run("--output " + zero.string() + " --check steady_state=0 simulate " + scenario("zero")).code == 0);
    CHECK(run("--output " + zero.string() + " --check time_lipschitz=-1 simulate " + scenario("zero")).code == 1);
}

TEST_CASE("cli: thread count does not change results") {
    const auto cfg = write_config("random_hk", kRandomHk);
    const auto one = scratch("threads1"), many = scratch("threads3");
    REQUIRE(run("--threads 1 --output " + one.string() + " simulate " + cfg.string()).code == 0);
    REQUIRE(run("--threads 3 --output " + many.string() + " simulate " + cfg.string()).code == 0);
    for (const char* name : {"trajectory.csv", "summary.csv"}) {
        CAPTURE(name);
        CHECK(opinion_lab::read_text_file(one / name) == opinion_lab::read_text_file(many / name));
    }

    const auto env = scratch("threads_env");
    const std::string env_cmd = "OPINION_LAB_THREADS=2 " + std::string(OPINION_LAB_CLI) + " --output " +
                                env.string() + " simulate " + cfg.string() + " > /dev/null 2>&1";
    REQUIRE(std::system(env_cmd.c_str()) == 0);
    CHECK(opinion_lab::read_text_file(one / "trajectory.csv") == opinion_lab::read_text_file(env / "trajectory.csv"));
}

TEST_CASE("cli: seeds") {
    const auto cfg = write_config("random_hk", kRandomHk);
    const auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
    REQUIRE(run("--output " + a.string() + " simulate " + cfg.string()).code == 0);
    REQUIRE(run("--output " + b.string() + " simulate " + cfg.string()).code == 0);
    REQUIRE(run("--seed-override 6 --output " + c.string() + " simulate " + cfg.string()).code == 0);
    CHECK(opinion_lab::read_text_file(a / "trajectory.csv") == opinion_lab::read_text_file(b / "trajectory.csv"));
    CHECK(opinion_lab::read_text_file(a / "trajectory.csv") != opinion_lab::read_text_file(c / "trajectory.csv"));
    CHECK(opinion_lab::read_text_file(c / "run_meta.json").find("\"rng_seed\": 6") != std::string::npos);
}

TEST_CASE("cli: counterexample flags") {
    const auto dir = scratch("counterexample");
    const auto r = run("--output " + dir.string() +
                       " --check counterexample_folds=2 counterexample --n 400 --t-end 20 --rhs-times 5,10");
    CHECK(r.output.find("counterexample_folds") != std::string::npos);
    CHECK(fs::exists(dir / "report.json"));
    const auto report = opinion_lab::read_text_file(dir / "report.json");
    CHECK(report.find("\"n_interval\": 400") != std::string::npos);
    CHECK(run("counterexample --p 0.5 --output " + dir.string()).code == 1);
}
