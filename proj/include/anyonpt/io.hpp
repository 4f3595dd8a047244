#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include <unistd.h>

#include "anyonpt/errors.hpp"
#include "anyonpt/grid.hpp"

namespace anyonpt {

/// Fixed 12-significant-digit rendering used by every output file.
inline std::string fmt(double x) {
    if (x == 0.0) x = 0.0;  // drop the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// JSON array of |psi|^2 samples.
inline void write_density_array(std::ostream& os, const WaveFunction& psi) {
    os << '[';
    for (std::size_t j = 0; j < psi.size(); ++j) {
        if (j) os << ',';
        os << fmt(std::norm(psi.values[j]));
    }
    os << ']';
}

/// Collects output files in a staging directory and publishes them together.
///
/// Files are written into a hidden directory inside the destination and
/// renamed into place by commit(). Destroying an uncommitted stage removes
/// everything it wrote, so a failed run leaves no partial outputs behind.
class StagedOutput {
public:
    explicit StagedOutput(std::filesystem::path dest) : dest_(std::move(dest)) {
        static std::atomic<unsigned> counter{0};
        std::error_code ec;
        std::filesystem::create_directories(dest_, ec);
        if (ec) throw ConfigError("cannot create output directory " + dest_.string() + ": " + ec.message());
        staging_ = dest_ / (".staging-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(staging_, ec);
        if (ec) throw ConfigError("cannot create staging directory " + staging_.string() + ": " + ec.message());
    }

    StagedOutput(const StagedOutput&) = delete;
    StagedOutput& operator=(const StagedOutput&) = delete;

    ~StagedOutput() {
        std::error_code ec;
        std::filesystem::remove_all(staging_, ec);
    }

    const std::filesystem::path& destination() const { return dest_; }

    /// Stream for `name` (relative to the destination); reused on repeat calls.
    std::ofstream& open(const std::string& name) {
        auto it = files_.find(name);
        if (it != files_.end()) return it->second;
        const auto path = staging_ / name;
        std::filesystem::create_directories(path.parent_path());
        auto [pos, ok] = files_.emplace(name, std::ofstream(path, std::ios::binary));
        if (!pos->second) throw ConfigError("cannot write " + path.string());
        return pos->second;
    }

    void write(const std::string& name, const std::string& contents) { open(name) << contents; }

    void commit() {
        for (auto& [name, stream] : files_) {
            stream.close();
            if (stream.fail()) throw NumericalError("write failed for " + name);
        }
        for (const auto& [name, stream] : files_) {
            const auto target = dest_ / name;
            std::filesystem::create_directories(target.parent_path());
            std::filesystem::rename(staging_ / name, target);
        }
        files_.clear();
    }

private:
    std::filesystem::path dest_;
    std::filesystem::path staging_;
    std::map<std::string, std::ofstream> files_;
};

}  // namespace anyonpt
