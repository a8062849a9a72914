#include <iostream>

#include <unistd.h>

#include "proofpad/cli.hpp"

int main(int argc, char** argv) {
  return proofpad::cli::run(argc, argv, std::cin, std::cout, std::cerr, ::isatty(STDIN_FILENO) == 1);
}
