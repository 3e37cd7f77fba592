#include "plemelj/cli.hpp"

int main(int argc, char** argv) { return plemelj::cli::main(argc, argv); }
