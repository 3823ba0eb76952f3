#include <iostream>

#include "medexchain/cli.hpp"

int main(int argc, char** argv) { return medexchain::cli::run(argc, argv, std::cout, std::cerr); }
