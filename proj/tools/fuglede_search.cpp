#include "fuglede/cli.hpp"

#include <iostream>

int main(int argc, char ** argv)
{
    fuglede::RunConfig config;
    try {
        config = fuglede::parse_args(argc, argv);
    } catch (const fuglede::HelpRequested & help) {
        std::cout << help.what();
        return fuglede::kExitVerified;
    } catch (const fuglede::UsageError & e) {
        std::cerr << "usage error: " << e.what() << "\n(run with --help for options)\n";
        return fuglede::kExitError;
    }
    return fuglede::run_cli(config, std::cerr);
}
