#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "stochfv/config.hpp"

namespace stochfv {

/// Exit codes shared by every command.
enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

/// Command-line overrides. `out` wins over STOCHFV_OUT, which wins over run.output.
struct CommandOptions {
    std::optional<std::string> out;
    bool vtk = false;
    std::optional<unsigned> parallel;
};

/// Creates and returns the output directory for a command.
std::string output_directory(const ExperimentConfig& config, const CommandOptions& options);

int cmd_mesh_info(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_run(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_ensemble(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_converge(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_verify(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out);

/// Loads `config_path` and runs the named command, mapping exceptions onto
/// exit codes: configuration and usage errors give 2, solver and check
/// failures give 1.
int run_command(const std::string& command, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

/// Entry point of the stochfv executable.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace stochfv
