#include <iostream>
#include <string>
#include <vector>

#include "mphate_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mphate::cli::run(args, std::cout, std::cerr);
}
