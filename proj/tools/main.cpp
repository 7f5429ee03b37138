#include <iostream>
#include <string>
#include <vector>

#include "sparse_recovery/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sparse_recovery::run_cli(args, std::cout, std::cerr);
}
