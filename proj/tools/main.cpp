#include "clozegen/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  int exit_code = 0;
  const auto config = clozegen::cli::parse_args(argc, argv, exit_code, std::cout, std::cerr);
  if (!config) return exit_code;
  return clozegen::cli::run(*config, std::cout, std::cerr);
}
