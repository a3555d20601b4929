#include <iostream>
#include <string>
#include <vector>

#include "synthts/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return synthts::cli::run(args, std::cout, std::cerr);
}
