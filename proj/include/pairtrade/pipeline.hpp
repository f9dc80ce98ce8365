#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairtrade/config.hpp"
#include "pairtrade/error.hpp"

namespace pairtrade::cli {

enum class Phase { Setup, Screen, Coint, Optimize, Backtest, Report };

const char* to_string(Phase phase);

/// Maps an exception to the process exit code: 1 usage/config, 2 data,
/// 3 point-in-time violation, 4 numerical failure.
int exit_code_for(const std::exception& e);

/// Failure inside one pipeline phase. Carries the exit code of the original
/// exception so the phase tag does not hide its category.
class PhaseError : public Error {
public:
    PhaseError(Phase phase, const std::exception& cause);

    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] int exit_code() const { return exit_code_; }

private:
    Phase phase_;
    int exit_code_;
};

/// Output directory of one run. Every file goes through write() so the
/// manifest can list it with its SHA-256.
class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string command, std::vector<Phase> expected);

    void write(const std::string& relative_path, const std::string& content);
    void phase_done(Phase phase);
    /// Writes run_manifest.json. `failure` marks the run incomplete.
    void finish(const std::optional<PhaseError>& failure, std::uint64_t seed);

    [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }
    [[nodiscard]] const std::map<std::string, std::string>& hashes() const { return hashes_; }

private:
    std::filesystem::path dir_;
    std::string command_;
    std::vector<Phase> expected_;
    std::vector<Phase> done_;
    std::map<std::string, std::string> hashes_;
};

std::string sha256_hex(const std::string& bytes);

/// Runs the phases a verb needs, in order, writing into cfg.output_dir.
/// Phase failures propagate as PhaseError after the manifest is written.
void cmd_screen(const RunConfig& cfg, std::ostream& log);
void cmd_coint(const RunConfig& cfg, std::ostream& log);
void cmd_optimize(const RunConfig& cfg, std::ostream& log);
void cmd_backtest(const RunConfig& cfg, std::ostream& log);
void cmd_pipeline(const RunConfig& cfg, std::ostream& log);

/// Turns a completed pipeline run into per-pair plot data under
/// run_dir/report. Throws DataError for a missing, empty or incomplete run.
void cmd_report(const std::filesystem::path& run_dir, std::ostream& log);

/// Entry point of the pairtrade executable; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pairtrade::cli
