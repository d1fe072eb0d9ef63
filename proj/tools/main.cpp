#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gwi::cli::run(argc, argv, std::cout, std::cerr); }
