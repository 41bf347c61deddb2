#include <iostream>
#include <string>
#include <vector>

#include "nlx/cli.hpp"

int main(int argc, char** argv) {
  return nlx::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
