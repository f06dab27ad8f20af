#include "hyperrigid/cli.hpp"

int main(int argc, char** argv) { return hyperrigid::cli::run(argc, argv); }
