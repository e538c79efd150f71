#include <cstdlib>
#include <iostream>

#include <unistd.h>

#include "relkg/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    relkg::CliEnv env;
    env.color = isatty(STDOUT_FILENO) && std::getenv("NO_COLOR") == nullptr;
    env.interactive = isatty(STDIN_FILENO);
    return relkg::run_cli(args, std::cin, std::cout, std::cerr, env);
}
