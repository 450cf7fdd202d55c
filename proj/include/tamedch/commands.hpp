// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace tamedch {

/// Process exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3, kExitIo = 4 };

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned workers = 1;
};

/// Runs "simulate", "convergence", "blowup" or "compare". Output files are
/// written to a temporary name and renamed into place; nothing is written when
/// validation fails. Failures print one "error:<kind>:<message>" line to err.
int run_command(const std::string& command, const CliOptions& options, std::ostream& err);

int cmd_simulate(const CliOptions& options, std::ostream& err);
int cmd_convergence(const CliOptions& options, std::ostream& err);
int cmd_blowup(const CliOptions& options, std::ostream& err);
int cmd_compare(const CliOptions& options, std::ostream& err);

}  // namespace tamedch
