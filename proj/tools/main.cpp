#include <iostream>

#include "hilreach/cli.hpp"

int main(int argc, char** argv) { return hilreach::runCli(argc, argv, std::cout, std::cerr); }
