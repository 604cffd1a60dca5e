#include <iostream>

#include "spatent/cli.hpp"

int main(int argc, char** argv) {
  return spatent::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
