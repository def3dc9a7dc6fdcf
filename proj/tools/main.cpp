#include "revinsight/cli.hpp"

int main(int argc, char** argv) { return revinsight::cli::main(argc, argv); }
