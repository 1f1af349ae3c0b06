#pragma once

#include <filesystem>
#include <iosfwd>

#include "delaybif_cli/config.hpp"

namespace delaybif::cli {

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitInvalid = 2, kExitNumerical = 3 };

/// Executes the configured job and writes its artifacts and manifest into
/// out_dir. Numerical failures keep what was written and add failure.json.
/// Returns kExitInvalid without writing anything when out_dir is unusable.
int run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace delaybif::cli
