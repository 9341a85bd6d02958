#include <iostream>
#include <string>
#include <vector>

#include "dissipative/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dissipative::cli::run(args, std::cout, std::cerr);
}
