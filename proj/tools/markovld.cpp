#include <iostream>
#include <string>
#include <vector>

#include "markovld/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return markovld::cli::run(args, std::cout, std::cerr);
}
