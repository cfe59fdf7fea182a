#include <vector>

#include "epcirc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return epcirc::run_cli(args);
}
