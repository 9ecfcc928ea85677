#pragma once

#include "mal/cli/config.hpp"
#include "mal/grid.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mal::cli {

enum ExitCode : int { exit_pass = 0, exit_violation = 1, exit_solver_failure = 2, exit_config_error = 3 };

struct RunContext {
    ExperimentConfig config;
    /// Directory against which relative supfam files resolve.
    std::filesystem::path base_dir;
    std::ostream& out;
    std::ostream& err;
};

/// The fixture endpoints (a, b). Throws ConfigError when one is not a potential.
std::pair<Potential, Potential> fixture_endpoints(const ExperimentConfig& config);
/// The second pair (c, d), or (b, a) when none is configured.
std::pair<Potential, Potential> second_pair(const ExperimentConfig& config);

/// Writes path.csv, path.json and hcma_residual.csv under output.directory.
int cmd_solve(const RunContext& ctx);

/// Runs the suites named in verification.suites, one JSON line per check on
/// ctx.out and in <output.directory>/verify.jsonl.
int cmd_verify(const RunContext& ctx);

/// CSV of value,weight rows (optional header) to breakpoint,level rows.
int cmd_rearrange(const std::filesystem::path& in, const std::filesystem::path& out, std::ostream& err);

}  // namespace mal::cli
