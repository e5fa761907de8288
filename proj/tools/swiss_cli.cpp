#include <iostream>
#include <string>
#include <vector>

#include "swiss/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return swiss::cli::run(args, std::cout, std::cerr);
}
