#include "tecell/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tecell::run_cli(argc, argv, std::cout, std::cerr); }
