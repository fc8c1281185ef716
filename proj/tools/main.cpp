#include "cli.hpp"

int main(int argc, char** argv) { return ownrecon::cli::run(argc, argv); }
