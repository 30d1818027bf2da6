#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scjarz/config.hpp"

namespace scjarz {

enum ExitCode : int { kExitSuccess = 0, kExitValidation = 2, kExitNumerical = 3 };

struct CommandResult {
  int exit_code = kExitSuccess;
  std::vector<std::filesystem::path> files;  // artifacts written, in order
  std::string summary;                       // one line for the terminal
};

// Each command writes its artifacts under out_dir (created if needed).
// Validation problems throw NumericalError(Validation); numerical failures
// that abort the whole run propagate as NumericalError of their kind.
CommandResult cmd_gibbs(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_work(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_jarzynski(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_oracle(const RunConfig& config, const std::filesystem::path& out_dir);

CommandResult run_command(const RunConfig& config, const std::filesystem::path& out_dir);

// Maps an exception escaping a command to the process exit code.
int exit_code_for(const NumericalError& error) noexcept;

}  // namespace scjarz
