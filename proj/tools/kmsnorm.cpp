#include <iostream>

#include "kmsnorm_cli.hpp"

int main(int argc, char** argv) { return kmsnorm::cli::run_cli(argc, argv, std::cout, std::cerr); }
