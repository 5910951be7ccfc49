#include "mbloch/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mbloch::run_cli(argc, argv, std::cout, std::cerr); }
