#include <iostream>

#include "wgqed/cli.hpp"

int main(int argc, char** argv) { return wgqed::run(argc, argv, std::cout, std::cerr); }
