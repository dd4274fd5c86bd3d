/// @file cli.hpp
/// @brief The cise-check command line, callable in-process.
///
/// Exit codes: 0 nothing to report, 1 conflicts (check) or violations
/// (simulate), 2 usage, input, solver or configuration errors and
/// inconclusive analyses.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cise {

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cise
