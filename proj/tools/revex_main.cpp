#include <string>
#include <vector>

#include "revex/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return revex::run_cli(args);
}
