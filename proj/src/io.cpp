#include "opinion_lab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace opinion_lab {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::string out = "t,agent_index,opinion\n";
    for (const auto& snap : trajectory.snapshots) {
        const std::string t = format_double(snap.time());
        for (std::size_t i = 0; i < snap.size(); ++i) {
            out += t;
            out += ',';
            out += format_double(snap.agent_index()[i]);
            out += ',';
            out += format_double(snap.opinion()[i]);
            out += '\n';
        }
    }
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "t,m1,m2,m3,m4,m5,m6,dissipation,w1_to_final,max_velocity\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        for (double m : r.moments) {
            out += ',';
            out += format_double(m);
        }
        for (double v : {r.dissipation, r.w1_to_final, r.max_velocity}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void require_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string() +
                                 (ec ? ": " + ec.message() : std::string()));
    }
    const auto probe = dir / ".write_probe";
    {
        std::ofstream f(probe);
        if (!f || !(f << "ok")) throw std::runtime_error("output directory " + dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) { require_writable_dir(dir_); }

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / (name + ".partial");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) throw std::runtime_error("failed to write " + path.string());
    names_.push_back(name);
}

void ArtifactWriter::commit() {
    for (const auto& name : names_) {
        std::filesystem::rename(dir_ / (name + ".partial"), dir_ / name);
    }
}

std::vector<std::string> ArtifactWriter::artifacts() const {
    std::vector<std::string> out;
    for (const auto& name : names_) out.push_back((dir_ / name).string());
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace opinion_lab
