#include "slsi/cli.hpp"

int main(int argc, char** argv) { return slsi::cli_main(argc, argv); }
