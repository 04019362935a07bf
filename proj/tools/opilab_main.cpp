#include <iostream>
#include <string>
#include <vector>

#include "opilab/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return opilab::run_cli(args, std::cout, std::cerr);
}
