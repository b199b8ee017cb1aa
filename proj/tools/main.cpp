#include "sis/cli.hpp"

int main(int argc, char** argv) { return sis::cli::main(argc, argv); }
