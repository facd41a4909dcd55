#include <iostream>

#include "jchk/cli.hpp"

int main(int argc, char** argv) { return jchk::cli::main_entry(argc, argv, std::cout, std::cerr); }
