#include <string>
#include <vector>

#include "rgbm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return rgbm::run_command(args);
}
