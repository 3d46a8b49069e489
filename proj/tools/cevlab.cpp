#include <iostream>

#include "cevlab/cli.hpp"

int main(int argc, char** argv) { return cevlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
