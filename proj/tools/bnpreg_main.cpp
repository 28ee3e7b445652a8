#include <iostream>
#include <string>
#include <vector>

#include "bnpreg/cli.hpp"

int main(int argc, char** argv) {
  return bnpreg::cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
