#include <iostream>

#include "shapetest/cli.hpp"

int main(int argc, char** argv) { return shapetest::run_cli(argc, argv, std::cout, std::cerr); }
