#include "pss/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pss::cli::run(argc, argv, std::cout, std::cerr); }
