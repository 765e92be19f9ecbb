#include "fanet/cli.hpp"

int main(int argc, char** argv) { return fanet::cli::main(argc, argv); }
