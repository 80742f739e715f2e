#include <iostream>
#include <string>
#include <vector>

#include "balrisk/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return balrisk::run_cli(args, std::cout, std::cerr);
}
