#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace caries::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kIoError = 2,
};

/// Runs one subcommand. `args` excludes the program name:
/// {"synth", "--out", "data", "--seed", "7"}.
/// Logs go to `err`; human-readable results (tables, chosen thresholds) to `out`.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caries::cli
