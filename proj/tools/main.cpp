#include <iostream>

#include "rwtree/cli.hpp"

int main(int argc, char** argv) { return rwtree::run_cli(argc, argv, std::cout, std::cerr); }
