#include <iostream>
#include <string>
#include <vector>

#include "aperture/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aperture::dispatch(args, std::cout, std::cerr);
}
