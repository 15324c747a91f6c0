#include <iostream>

#include "factorial/cli.hpp"

int main(int argc, char** argv) { return factorial::cli::run(argc, argv, std::cout, std::cerr); }
