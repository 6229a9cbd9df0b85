#include <string>
#include <vector>

#include "ghzw/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ghzw::cli_main(std::move(args));
}
