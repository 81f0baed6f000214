#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pluralis {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitGuard = 2,
    kExitDomain = 3,
    kExitFingerprint = 4,
};

int cmd_build(const std::filesystem::path& env_path, std::size_t resolution, const std::string& kind,
              const std::filesystem::path& out_path, std::ostream& out, std::ostream& err);

int cmd_select(const std::filesystem::path& cs_path, const std::filesystem::path& utility_path, std::ostream& out,
               std::ostream& err);

struct SteerFlags {
    double beta = 5.0;
    std::size_t resolution = 10;
    bool noiseless = false;
    std::optional<std::filesystem::path> jury_path;
};

/// Writes the JSON-lines log to `log_path` and the CSV summary next to it
/// (same stem, .csv extension).
int cmd_steer(const std::filesystem::path& cs_path, const std::filesystem::path& env_path,
              const std::vector<double>& true_weights, std::size_t steps, std::uint64_t seed,
              const std::filesystem::path& log_path, const SteerFlags& flags, std::ostream& out, std::ostream& err);

/// Blocks serving the HTTP API until the process is stopped.
int cmd_serve(int port, const std::filesystem::path& cs_path, const std::filesystem::path& env_path,
              std::ostream& out, std::ostream& err);

/// Path of the CSV summary written alongside a steering log.
std::filesystem::path summary_path_for(const std::filesystem::path& log_path);

}  // namespace pluralis
