#include <iostream>

#include "lattice_dirac/cli.hpp"

int main(int argc, char** argv) { return lattice_dirac::run_cli(argc, argv, std::cout, std::cerr); }
