#include <iostream>
#include <string>
#include <vector>

#include "fraclap/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fraclap::cli::cli_main(args, std::cout, std::cerr);
}
