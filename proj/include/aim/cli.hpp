#pragma once

#include <iosfwd>
#include <string>

#include "aim/scenario.hpp"

namespace aim {

/// Process exit statuses of the command-line tool.
enum ExitStatus : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInvariant = 2,
    kExitAudit = 3,
};

/// Loads a scenario file, or a built-in scenario when no such file exists.
Scenario resolve_scenario(const std::string& name_or_path);

/// Entry point of `aimsim`. Environment variables AIM_SCENARIO, AIM_SEED,
/// AIM_POLICY, AIM_PAPER_MODE, AIM_OUT and AIM_DURATION stand in for the
/// corresponding flags.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aim
