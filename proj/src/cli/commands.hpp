#pragma once

#include <filesystem>
#include <ostream>

#include "config.hpp"

namespace nldg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitBlowup = 3,
  kExitSolver = 4,
  kExitPartialBranch = 5,
};

/// Runs one validated command, writing its artifacts under config.out_dir.
/// Progress goes to `log` when verbose is set.
int run_command(Command command, const RunConfig& config, bool verbose, std::ostream& log);

/// Validates, creates the output directory and runs. Library errors map onto
/// the exit-code vocabulary; messages go to `err`.
int execute(Command command, const RunConfig& config, bool verbose, std::ostream& err);

/// Deterministic smooth test data: one Gaussian bump per edge and component.
SpinorField random_bumps(GridPtr grid, std::uint64_t seed);

}  // namespace nldg::cli
