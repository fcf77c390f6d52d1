#include "sparsetrack/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return sparsetrack::run_cli(argc, argv, std::cout, std::cerr); }
