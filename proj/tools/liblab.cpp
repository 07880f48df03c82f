#include <iostream>

#include "experiment.hpp"

int main(int argc, char** argv) { return liblab::cli::cli_main(argc, argv, std::cout, std::cerr); }
