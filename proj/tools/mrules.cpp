#include <iostream>

#include "mrules/cli.hpp"

int main(int argc, char** argv) {
  return mrules::cli::run(argc, argv, std::cout, std::cerr);
}
