#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "opinion_lab/counterexample.hpp"
#include "opinion_lab/ensemble.hpp"
#include "opinion_lab/kernels.hpp"
#include "opinion_lab/picard.hpp"
#include "opinion_lab/profile.hpp"

namespace opinion_lab {

enum class CheckKind { Simulation, Picard, Counterexample };

/// AtMost: pass iff the measured value <= tolerance. AtLeast: pass iff >=.
enum class CheckBound { AtMost, AtLeast };

struct CheckInfo {
    std::string_view name;
    CheckKind kind;
    CheckBound bound;
    double default_tolerance;
    std::string_view reference;  // key into the traceability table in docs/checks.md
    std::string_view measures;
};

const std::vector<CheckInfo>& known_checks();
const CheckInfo* find_check(std::string_view name);
std::string known_check_names();

struct CheckSpec {
    std::string name;
    double tolerance = 0.0;
};

struct PicardSection {
    double t_end = 1.0;
    double reference_dt = 1e-4;
    PicardOptions options;
};

struct CounterexampleSection {
    cycling::Params params;
    CounterexampleOptions options;
};

struct ScenarioConfig {
    std::string name;
    std::string kernel_family;
    Kernel kernel = Kernel::zero();
    /// Smallest confidence radius for radius-based kernels; drives the
    /// cluster separation check.
    std::optional<double> confidence_radius;
    OpinionProfile profile = OpinionProfile::identity();
    std::size_t n = 0;
    IntegratorConfig integrator;
    std::vector<CheckSpec> checks;
    std::filesystem::path output_dir;
    std::uint64_t rng_seed = 1;
    std::optional<PicardSection> picard;
    std::optional<CounterexampleSection> counterexample;
    std::string source_text;
    std::string source_path;
};

/// Every problem found while loading, in document order.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Command-line values that replace or extend the file.
struct ConfigOverrides {
    std::optional<std::uint64_t> rng_seed;
    std::optional<std::filesystem::path> output_dir;
    std::vector<CheckSpec> checks;  // replaces a listed check's tolerance, else appends
};

/// Parses a YAML scenario. Throws ConfigError listing every error found;
/// parse errors carry line and column.
ScenarioConfig parse_config(const std::string& text, const std::string& origin, const ConfigOverrides& overrides = {},
                            bool check_output_dir = true);

ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {},
                           bool check_output_dir = true);

/// Parses `name=tolerance`. Throws ConfigError on malformed input or an unknown name.
CheckSpec parse_check_override(const std::string& text);

}  // namespace opinion_lab
