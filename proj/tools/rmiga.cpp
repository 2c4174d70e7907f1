#include <iostream>

#include "rmiga/cli.hpp"

int main(int argc, char** argv) { return rmiga::cli::main(argc, argv, std::cout, std::cerr); }
