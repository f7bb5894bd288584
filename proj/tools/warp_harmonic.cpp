#include <iostream>

#include "warp_harmonic/cli.hpp"

int main(int argc, char** argv) {
  return warp_harmonic::cli::run(argc, argv, std::cout, std::cerr);
}
