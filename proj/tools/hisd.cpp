#include <exception>
#include <iostream>

#include "hisd/cli.hpp"

int main(int argc, char** argv) {
  try {
    return hisd::cli::main(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
