#include "attlist/cli.hpp"

int main(int argc, char** argv) {
    return attlist::cli::run_cli(argc, argv);
}
