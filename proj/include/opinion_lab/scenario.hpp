#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "opinion_lab/config.hpp"

namespace opinion_lab {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitPass = 0, kExitRuntimeError = 1, kExitCheckFailed = 2 };

struct CheckResult {
    std::string name;
    bool pass = false;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    std::string bound;  // "at_most" or "at_least"
    std::string reference;
    std::string detail;
};

struct RunReport {
    std::string scenario;
    std::string command;
    double wall_time = 0.0;
    std::vector<CheckResult> checks;
    std::vector<std::string> skipped;  // listed checks that belong to another subcommand
    std::vector<std::string> artifacts;
    std::string error;  // non-empty after a runtime error
    nlohmann::json details = nlohmann::json::object();

    [[nodiscard]] bool pass() const;
    [[nodiscard]] int exit_code() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

struct RunOptions {
    std::size_t threads = 1;
};

/// simulate: integrates the scenario and evaluates its simulation checks.
/// Writes trajectory.csv, summary.csv, report.json and run_meta.json. Never
/// throws; runtime errors are reported through RunReport::error, and whatever
/// was produced is left behind with a `.partial` suffix.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// picard-check: chains Picard windows over the configured horizon and
/// cross-validates against RK4.
RunReport run_picard_check(const ScenarioConfig& config, const RunOptions& options = {});

/// counterexample: closed-form cycling construction and its verification.
RunReport run_counterexample(const ScenarioConfig& config, const RunOptions& options = {});

/// Human-readable table of a finished (or partial) run directory. Returns the
/// exit code recorded by that run, or kExitRuntimeError if no report exists.
int print_run_report(const std::filesystem::path& run_dir, std::ostream& out);

const char* library_version();

}  // namespace opinion_lab
