#include <unistd.h>

#include <iostream>
#include <string>
#include <vector>

#include "nrt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  const nrt::cli::Streams streams{std::cout, std::cerr, nrt::cli::use_color(isatty(STDOUT_FILENO) != 0)};
  return nrt::cli::run_cli(args, streams);
}
