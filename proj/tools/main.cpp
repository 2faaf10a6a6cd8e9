#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return lnsev::cli::run_cli(argc, argv, std::cout, std::cerr); }
