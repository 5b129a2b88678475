#include <iostream>

#include "migrant/cli.hpp"

int main(int argc, char** argv) { return migrant::run_cli(argc, argv, std::cout, std::cerr); }
