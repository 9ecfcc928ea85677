#pragma once

// Text forms of Lagrangian specs: orlicz:p<p>, lorentz:a<alpha>, power:p<p>
// and supfam:<file>, where the file is JSON
//   {"members": [{"a": 0.0, "breakpoints": [0, 0.5, 1], "levels": [1, 0]}]}.

#include "mal/lagrangian.hpp"

#include <filesystem>
#include <string>

namespace mal::cli {

/// Relative supfam paths resolve against base_dir. Throws ConfigError.
LagrangianSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir = {});

LagrangianSpec load_sup_family(const std::filesystem::path& file);

}  // namespace mal::cli
