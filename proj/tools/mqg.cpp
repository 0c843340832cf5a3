#include "mqg/cli.hpp"

int main(int argc, char** argv) { return mqg::cli::main(argc, argv); }
