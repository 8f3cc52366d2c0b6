#include <iostream>

#include "stochfv/commands.hpp"

int main(int argc, char** argv) { return stochfv::run_cli(argc, argv, std::cout, std::cerr); }
