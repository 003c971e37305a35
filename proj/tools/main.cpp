#include <iostream>

#include "llfisher/cli.hpp"

int main(int argc, char** argv) { return llfisher::cli::main_entry(argc, argv, std::cout, std::cerr); }
