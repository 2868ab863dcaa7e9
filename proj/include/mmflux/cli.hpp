#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmflux/config.hpp"

namespace mmflux {

enum ExitCode : int { kExitOk = 0, kExitViolation = 1, kExitConfig = 2, kExitResolution = 3 };

/// Output context shared by the subcommands. Messages go to `log` unless quiet.
struct CommandContext {
    std::filesystem::path out;
    std::ostream* log = nullptr;
    bool quiet = false;
};

/// Each command writes under ctx.out and returns kExitOk or kExitViolation.
/// Invalid configs throw ConfigError, unresolved test functions ResolutionError.
int cmd_solve(const RunConfig& config, const CommandContext& ctx);
int cmd_verify(const RunConfig& config, const CommandContext& ctx);
int cmd_converge(const RunConfig& config, const CommandContext& ctx);
int cmd_ym(const RunConfig& config, const CommandContext& ctx);
int cmd_parametrize(const RunConfig& config, const CommandContext& ctx);

const std::vector<std::string>& command_names();

/// Dispatches by name and maps exceptions to exit codes, printing the message to `err`.
int run_command(const std::string& name, const RunConfig& config, const CommandContext& ctx, std::ostream& err);

/// Time levels picked for `count` evenly spaced snapshot times (first level at or after each target).
std::vector<std::size_t> snapshot_levels(const std::vector<double>& times, std::size_t count);

}  // namespace mmflux
