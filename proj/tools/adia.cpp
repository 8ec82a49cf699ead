#include <iostream>
#include <string>
#include <vector>

#include "adiabatic/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return adiabatic::run_cli(args, std::cout, std::cerr);
}
