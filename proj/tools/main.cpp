#include <string>
#include <vector>

#include "bregtrim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bregtrim::run_cli(args);
}
