#include <iostream>

#include "dmpc/cli/commands.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return dmpc::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
