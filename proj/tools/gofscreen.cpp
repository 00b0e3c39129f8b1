#include <iostream>
#include <string>
#include <vector>

#include "gofscreen/cli.hpp"

int main(int argc, char** argv) {
  return gofscreen::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
