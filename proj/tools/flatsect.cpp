#include <iostream>

#include "flatsect/cli.hpp"

int main(int argc, char** argv) {
    return flatsect::cli::run(argc, argv, std::cout, std::cerr);
}
