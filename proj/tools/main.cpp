#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  reofilm::cli::configure_logging();
  return reofilm::cli::run_cli(argc, argv, std::cout, std::cerr);
}
