#include "hdiv/cli.hpp"

int main(int argc, char** argv) { return hdiv::cli_main(argc, argv); }
