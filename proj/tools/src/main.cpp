#include <iostream>

#include "driftscan_cli/commands.hpp"

int main(int argc, char** argv) { return driftscan::cli::run(argc, argv, std::cout, std::cerr); }
