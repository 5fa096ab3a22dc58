#include <iostream>
#include <string>
#include <vector>

#include "epiconj/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return epiconj::cli::run_cli(args, std::cout, std::cerr);
}
