#include <iostream>

#include "hysens/cli.hpp"

int main(int argc, char** argv) { return hysens::run_cli(argc, argv, std::cout, std::cerr); }
