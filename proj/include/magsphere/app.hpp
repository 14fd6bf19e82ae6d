#pragma once

#include <string>

#include "magsphere/config.hpp"

namespace magsphere {

// The five batch commands. Each writes its artifacts under
// config.output_dir with deterministic names and returns the process exit
// code: 0 success, 3 when solver divergence left a run without solutions.
// Domain errors (bad configuration, bad input files, invalid curves) are
// thrown and mapped to exit codes by the entry point.
int cmd_melnikov_scan(const RunConfig& config);
int cmd_solve(const RunConfig& config);
int cmd_shoot(const RunConfig& config, const std::string& loop_path);
int cmd_verify(const RunConfig& config, const std::string& loop_path);
int cmd_landscape(const RunConfig& config);

}  // namespace magsphere
