#include <vector>

#include "pcurv/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pcurv::run_cli(args);
}
