#include <iostream>

#include "afg/cli.hpp"

int main(int argc, char** argv) { return afg::cli::run(argc, argv, std::cout, std::cerr); }
