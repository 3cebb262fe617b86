#include "gpner/cli.hpp"

int main(int argc, char** argv) { return gpner::cli_main(argc, argv); }
