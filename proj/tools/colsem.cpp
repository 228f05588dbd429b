#include <iostream>

#include "colsem/cli.hpp"

int main(int argc, char** argv) { return colsem::cli::main(argc, argv, std::cout, std::cerr); }
