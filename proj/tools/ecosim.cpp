#include <iostream>

#include "ecosim/cli.hpp"

int main(int argc, char** argv) { return ecosim::run_cli(argc, argv, std::cout, std::cerr); }
