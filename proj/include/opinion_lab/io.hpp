#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "opinion_lab/ensemble.hpp"

namespace opinion_lab {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// One row per node per snapshot: t,agent_index,opinion.
std::string trajectory_csv(const Trajectory& trajectory);

struct SummaryRow {
    double t = 0.0;
    double moments[6] = {};
    double dissipation = 0.0;
    double w1_to_final = 0.0;
    double max_velocity = 0.0;
};

/// t,m1,...,m6,dissipation,w1_to_final,max_velocity.
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Writes artifacts as `<name>.partial` and renames them all on commit, so a
/// run that dies midway leaves only `.partial` files behind.
class ArtifactWriter {
public:
    /// Creates the directory; throws std::runtime_error when it cannot be
    /// created or written to.
    explicit ArtifactWriter(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    void commit();
    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }
    /// Final paths of everything written so far.
    [[nodiscard]] std::vector<std::string> artifacts() const;

private:
    std::filesystem::path dir_;
    std::vector<std::string> names_;
};

/// Throws std::runtime_error unless `dir` exists (or can be created) and
/// accepts a new file.
void require_writable_dir(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace opinion_lab
