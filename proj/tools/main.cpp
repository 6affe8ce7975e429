#include <iostream>

#include "rmdl/cli.hpp"

int main(int argc, char** argv) { return rmdl::cli::run(argc, argv, std::cout, std::cerr); }
