#include <iostream>

#include "roboecon/cli.hpp"

int main(int argc, char** argv) { return roboecon::cli::run_cli(argc, argv, std::cout, std::cerr); }
