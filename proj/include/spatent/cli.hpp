#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatent/io.hpp"

namespace spatent::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitConvergence = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs one subcommand from fully resolved arguments, the same object that is
// stored in the run manifest. Throws on usage or data errors.
int run_command(const std::string& command, const json& args, std::ostream& out, std::ostream& err);

// Re-runs the command recorded in `manifest` into `out_dir` and compares the
// output checksums. Returns kExitOk only when every output is byte-identical.
int replay(const fs::path& manifest, const fs::path& out_dir, std::ostream& out, std::ostream& err);

// Entry point of the spatent executable; maps exceptions to exit codes.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace spatent::cli
