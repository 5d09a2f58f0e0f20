#include <iostream>
#include <string>
#include <vector>

#include "m3fg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return m3fg::run_cli(args, std::cout, std::cerr);
}
