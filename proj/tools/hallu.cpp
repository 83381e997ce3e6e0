#include <iostream>
#include <string>
#include <vector>

#include "hallu/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hallu::run_cli(args, {std::cout, std::cerr});
}
