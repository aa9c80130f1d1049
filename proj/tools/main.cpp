#include <iostream>
#include <string>
#include <vector>

#include "cloudneg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cloudneg::run_cli(args, std::cout, std::cerr);
}
