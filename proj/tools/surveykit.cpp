#include <iostream>
#include <string>
#include <vector>

#include "surveykit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return surveykit::cli::run(args, std::cout, std::cerr);
}
