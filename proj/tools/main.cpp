#include "kema/cli.hpp"

int main(int argc, char** argv) { return kema::cli::main(argc, argv); }
