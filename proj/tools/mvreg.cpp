#include <iostream>

#include "mvreg/cli.hpp"

int main(int argc, char** argv) { return mvreg::cli_main(argc, argv, std::cout, std::cerr); }
