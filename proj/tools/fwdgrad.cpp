#include "fwdgrad/harness/cli.hpp"

int main(int argc, char** argv) { return fwdgrad::harness::cli_main(argc, argv); }
