#include "sonn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return sonn::run_cli(argc, argv, std::cout, std::cerr);
}
