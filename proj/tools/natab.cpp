#include <iostream>

#include "natab/harness.hpp"

int main(int argc, char** argv) { return natab::run_cli(argc, argv, std::cout, std::cerr); }
