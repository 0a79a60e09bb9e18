#include <iostream>

#include "mtlprior/cli.hpp"

int main(int argc, char** argv) { return mtlprior::run_cli(argc, argv, std::cout, std::cerr); }
