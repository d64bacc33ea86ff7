#include <iostream>

#include "w3sim/cli.hpp"

int main(int argc, char** argv) {
    return w3sim::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
