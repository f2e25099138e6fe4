#include <iostream>

#include "qgraph/cli.hpp"

int main(int argc, char** argv)
{
    qgraph::cli::RunConfig cfg;
    try {
        cfg = qgraph::cli::parse_args(argc, argv);
    } catch (const qgraph::cli::UsageError& e) {
        (e.status == 0 ? std::cout : std::cerr) << e.what() << (e.status ? "\n" : "");
        return e.status;
    }
    return qgraph::cli::run(cfg, std::cout, std::cerr);
}
