#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace curator::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       // bad or missing flags
  kIoError = 2,     // unreadable input, unwritable output
  kInvalid = 3,     // malformed data, out-of-range parameters, missing labels
  kNumeric = 4,     // singular fits, non-finite results
  kPolicy = 5,      // curated reference used without --allow-curated-reference
};

// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace curator::cli
