#include "rankneat/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return rankneat::run_cli(argc, argv, std::cout, std::cerr);
}
