#include <iostream>

#include "jumpdiff/cli.hpp"

int main(int argc, char** argv) { return jumpdiff::run_cli(argc, argv, std::cout, std::cerr); }
