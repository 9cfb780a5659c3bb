#include <iostream>
#include <string>
#include <vector>

#include "mixedtri/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return mixedtri::cli::run(args, std::cout, std::cerr);
}
