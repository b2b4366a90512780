#include "symorb/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return symorb::cli::run(argc, argv, std::cout, std::cerr); }
