#include <iostream>

#include "aim/cli.hpp"

int main(int argc, char** argv) { return aim::run_cli(argc, argv, std::cout, std::cerr); }
