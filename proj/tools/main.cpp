#include <iostream>
#include <string>
#include <vector>

#include "patchproc/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return patchproc::run_cli(args, std::cout, std::cerr);
}
