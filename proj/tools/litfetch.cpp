#include <iostream>

#include "litfetch/cli.hpp"

int main(int argc, char** argv) {
  return litfetch::run_cli(argc, argv, std::cout, std::cerr);
}
