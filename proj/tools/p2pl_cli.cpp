#include "p2pl/cli.hpp"

int main(int argc, char** argv) { return p2pl::cli::run(argc, argv); }
