/// @file cpe_main.cpp
/// @brief Command-line entry point; see cli_main for the subcommands.

#include <iostream>
#include <string>
#include <vector>

#include "cpe/io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cpe::cli_main(args, std::cout, std::cerr);
}
