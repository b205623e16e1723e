#include <iostream>
#include <string>
#include <vector>

#include "urbanpulse/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return urbanpulse::run(args, std::cout, std::cerr);
}
