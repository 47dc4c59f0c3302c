#include <iostream>
#include <string>
#include <vector>

#include "sptucker/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sptucker::run_cli(args, std::cout, std::cerr);
}
