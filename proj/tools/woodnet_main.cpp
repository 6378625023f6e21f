#include <iostream>

#include "woodnet/cli.hpp"

int main(int argc, char** argv) { return woodnet::run_cli(argc, argv, std::cout, std::cerr); }
