#include <iostream>

#include "drd/cli/cli.hpp"

int main(int argc, char** argv) { return drd::cli::run(argc, argv, std::cout, std::cerr); }
