#include <iostream>

#include "prw/cli.hpp"

int main(int argc, char** argv) {
    return prw::run_cli(argc, argv, std::cout, std::cerr);
}
