#include <iostream>

#include "mhb/cli.hpp"

int main(int argc, char** argv) {
  return mhb::cli::run(argc, argv, std::cout, std::cerr);
}
