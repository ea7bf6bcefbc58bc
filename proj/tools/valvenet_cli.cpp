#include <iostream>

#include "valvenet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return valvenet::run_command(args, std::cout, std::cerr);
}
