#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace polarset::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kInputError = 2, kBudgetError = 3 };

struct RunOptions {
  std::string command;
  std::string scenario;
  std::string out = ".";
  std::string measure;  // audit input
  std::string kind;     // audit kind override
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

/// Runs one subcommand. Writes report.json and the command's artifacts into
/// options.out, and wall time into timing.json (kept apart so reports stay
/// byte-identical across runs).
int run(const RunOptions& options, std::ostream& log);

}  // namespace polarset::cli
