#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nrt::cli {

enum ExitCode : int { kSuccess = 0, kHardError = 1, kPartialFailure = 2 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
  bool color = false;
};

/// Entry point behind the `nrt` binary. `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, const Streams& streams);

/// True when `out_is_tty` and NO_COLOR is unset or empty.
bool use_color(bool out_is_tty);

}  // namespace nrt::cli
